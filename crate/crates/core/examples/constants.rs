//! Solves the named constants and checks that the three functional terms
//! coincide at the extremal two-point law.

use uc_entropy::constants::{sharpness_identity_check, sharpness_residual, CriticalConstants};

fn main() -> uc_entropy::Result<()> {
    let k = CriticalConstants::compute()?;
    println!("psi   = {:.16}", k.psi);
    println!("b1    = {:.15}  residual {:+.1e}", k.b1, sharpness_residual(k.b1));
    println!("b2    = {:.15}  residual {:+.1e}", k.b2, sharpness_residual(k.b2));
    println!("a     = {:.16}", k.a);
    println!("c     = {:.15}", k.c);
    println!("alpha = {}", k.alpha);

    let s = sharpness_identity_check()?;
    println!(
        "\nat {{b2: 1-a, 1: a}}: independent {:.15}, self {:.15}, coupled {:.15}",
        s.independent, s.self_term, s.coupled
    );
    println!("max pairwise difference {:.1e}", s.max_difference());
    Ok(())
}
