//! Randomised property suites for the redistribution lemmas, the Karamata
//! claim and the derivative conditions.

use uc_entropy::dist::{karamata_claim_check, reduction_direction_check, Dist};
use uc_entropy::repro::property_suites;

fn main() -> uc_entropy::Result<()> {
    let d = Dist::new([(0.9, 0.2), (0.1, 0.8)])?;
    let r = reduction_direction_check(&d, 0.9, 1.044)?;
    println!("reduction of 0.9 in {{0.9: 0.2, 0.1: 0.8}}: {:.6} > {:.6} ({})", r.lhs, r.rhs, r.holds);
    println!("stripped law: {:?}", d.strip_upper_interval().atoms());

    let k = karamata_claim_check(0.1, 0.2, 0.3, 0.15)?;
    println!("karamata at (0.1, 0.2, 0.3, 0.15): {:.6} >= {:.6}", k.lhs, k.rhs);

    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    println!();
    for s in property_suites(trials, 7)? {
        println!("{:<24} {:>6} trials  {} violations  worst {:.2e}", s.name, s.trials, s.violations, s.worst);
    }
    Ok(())
}
