//! Recovers the critical bound as a function of the weight, then the weight
//! that maximises it. Takes under a minute in release mode.

use uc_entropy::optimizer::{find_alpha, find_critical_c};

fn main() -> uc_entropy::Result<()> {
    for alpha in [0.0, 0.02, 0.0356069, 0.05, 0.1] {
        println!("c({alpha:<9}) = {:.7}", find_critical_c(alpha, 1e-7)?);
    }
    match find_critical_c(1.0, 1e-7) {
        Ok(c) => println!("c(1) = {c}"),
        Err(e) => println!("c(1): {e}"),
    }
    let (alpha, c) = find_alpha(1e-3)?;
    println!("\nbest weight {alpha:.5} with critical bound {c:.7}");
    Ok(())
}
