//! Grid certification over laws on three atoms, at the default constants and
//! just above the critical bound.

use uc_entropy::functional::MixParams;
use uc_entropy::optimizer::{minimize_support3, CERT_TOL};

fn main() -> uc_entropy::Result<()> {
    let grid = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    for c in [0.3823455, 0.383, 0.39] {
        let params = MixParams::new(0.0356069, c)?;
        let r = minimize_support3(&params, grid, 4)?;
        let m = r.argmin;
        println!(
            "c = {c:<9} min {:>11.3e}  certified {:<5}  argmin {{{:.5}: {:.5}, {:.5}: {:.5}, 1: {:.5}}}  ({} evaluations)",
            r.min_value,
            r.min_value >= -CERT_TOL,
            m.a1,
            m.p1,
            m.a2,
            m.p2,
            m.mass_at_one(),
            r.evaluations
        );
    }
    Ok(())
}
