//! Coupled sampling of two members of a family: Monte Carlo against the exact
//! joint law, entropies, and the per-coordinate inequality.

use uc_entropy::functional::MixParams;
use uc_entropy::family::SetFamily;
use uc_entropy::sampler::{
    audit_coupling, entropy_comparison, exact_joint_law, monte_carlo, per_element_inequality_check, sample_pair,
};

fn main() -> uc_entropy::Result<()> {
    let params = MixParams::default();
    // Every element lies in a third of the sets, below the critical bound.
    let f = SetFamily::from_json(r#"{"n": 4, "sets": [[1], [2], [3], [4], [1, 2], [3, 4]]}"#)?;
    println!("family {:?}", f.element_lists());
    println!("first draws: {:?}", (0..5).map(|s| sample_pair(&f, s)).collect::<Vec<_>>());

    let exact = exact_joint_law(&f)?;
    let mc = monte_carlo(&f, 200_000, 1);
    println!("\n(A, C)        exact     sampled");
    for (&(a, c), &p) in &exact.outcomes {
        let k = mc.counts.get(&(a, c)).copied().unwrap_or(0);
        println!("({a:04b}, {c:04b})  {p:.5}   {:.5}", k as f64 / mc.samples as f64);
    }

    let audit = audit_coupling(&f)?;
    println!("\nmarginal deviation {:.1e}, union formula error {:.1e}", audit.max_marginal_deviation, audit.max_union_formula_error);

    let e = entropy_comparison(&f, &params)?;
    println!(
        "H(A) = {:.6}, H(A∪B) = {:.6}, H(A∪C) = {:.6}, combination {:.6} (exceeds H(A): {})",
        e.h_a, e.h_union_independent, e.h_union_coupled, e.combination, e.exceeds_h_a
    );

    let r = per_element_inequality_check(&f, &params)?;
    println!("\nper-coordinate margins:");
    for c in &r.coordinates {
        println!("  element {}: E = {:.3}  margin {:+.5}  {:?}", c.element, c.expectation, c.margin, c.status);
    }
    Ok(())
}
