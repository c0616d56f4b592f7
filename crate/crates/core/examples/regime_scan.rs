//! Writes the two regime slices to CSV and runs the four-atom robustness scan.

use uc_entropy::functional::MixParams;
use uc_entropy::optimizer::{regime_scan, support4_robustness_scan};

fn main() -> uc_entropy::Result<()> {
    let params = MixParams::default();
    let out = std::env::temp_dir().join("regime_scan.csv");
    let s = regime_scan(&params, &out)?;
    println!("wrote {} rows to {}", s.rows, out.display());
    if let Some(r) = s.atomic_min {
        println!(
            "two-point slice minimum {:.3e} at {{{:.4}: {:.4}, 1: {:.4}}}",
            r.total,
            r.point.a2,
            r.point.p2,
            r.point.mass_at_one()
        );
    }
    if let Some(r) = s.zero_one_min {
        println!("{{0, a2, 1}} slice minimum {:.3e} at a2 = {:.4}, p2 = {:.4}", r.total, r.point.a2, r.point.p2);
    }

    let r = support4_robustness_scan(&params, 24)?;
    println!(
        "\nfour atoms incl. 1/4: min {:.3e} vs three atoms {:.3e}, undercut {}, argmin {:?}",
        r.min_value, r.support3_min, r.undercut, r.argmin
    );
    Ok(())
}
