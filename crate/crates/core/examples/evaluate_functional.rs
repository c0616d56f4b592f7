//! Evaluates the functional term by term on a few laws.

use uc_entropy::constants::{derive_a, reference};
use uc_entropy::dist::{quantile_coupling, Dist};
use uc_entropy::functional::{atomic_vertex_check, mixed_functional, single_term_counterexample, MixParams};

fn main() -> uc_entropy::Result<()> {
    let params = MixParams::default();
    let laws = [
        ("extremal law", Dist::two_point(reference::B2, reference::A)?),
        ("{0, 1} law", Dist::new([(0.0, 0.65), (1.0, 0.35)])?),
        ("three atoms", Dist::new([(0.1, 0.5), (0.3, 0.3), (1.0, 0.2)])?),
        ("point mass", Dist::point(0.3)?),
    ];
    println!("alpha = {}, c = {}", params.alpha, params.c);
    println!("{:<14} {:>8} {:>10} {:>10} {:>10} {:>11}", "law", "E[p]", "indep", "coupled", "self", "total");
    for (name, d) in &laws {
        let b = mixed_functional(d, &params)?;
        println!(
            "{name:<14} {:>8.5} {:>10.6} {:>10.6} {:>10.6} {:>11.3e}",
            d.expectation(),
            b.term_indep,
            b.term_coupled,
            b.term_self,
            b.total
        );
    }

    let cp = quantile_coupling(&laws[2].1)?;
    println!("\nquantile coupling of the three-atom law:");
    for cell in cp.cells() {
        println!("  ({:.2}, {:.2})  {:.4}", cell.x, cell.y, cell.mass);
    }

    let r = single_term_counterexample(0.001)?;
    println!(
        "\ncoupled term alone at b = 1/4, a = {:.5}: {:.6} < self {:.6}, E[p] = {:.4}",
        r.a, r.term_coupled, r.term_self, r.expectation
    );

    let v = atomic_vertex_check(reference::B2, &params);
    println!(
        "vertex of the atomic quadratic at b2: {:.4} > boundary {:.4} ({}), a(b2) = {:.6}",
        v.vertex,
        v.boundary,
        v.holds,
        derive_a(reference::B2)
    );
    Ok(())
}
