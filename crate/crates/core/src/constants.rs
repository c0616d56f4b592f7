//! Named constants of the two-term entropy inequality and the root finders
//! that produce them.

use serde::Serialize;

use crate::entropy::{h, h_prime};
use crate::error::{Error, Result};

/// Default mixing weight of the coupled term. It has no closed form; see
/// [`crate::optimizer::find_alpha`] for a re-derivation.
pub const DEFAULT_ALPHA: f64 = 0.0356069;

/// Default expectation bound used by the CLI and the certification runs.
pub const DEFAULT_C: f64 = 0.3823455;

/// Reference digits for the two-point extremal law.
pub mod reference {
    pub const B1: f64 = 0.139499451909862;
    pub const B2: f64 = 0.329454738503037;
    pub const A: f64 = 0.0788772927059232;
    pub const C: f64 = 0.382345533366703;
}

const BISECTION_WIDTH: f64 = 1e-15;
const NEWTON_STEPS: usize = 5;
const BRACKET_SCAN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConstants {
    pub psi: f64,
    pub b1: f64,
    pub b2: f64,
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
}

impl CriticalConstants {
    /// Solves every constant from scratch; `alpha` is the stored default.
    pub fn compute() -> Result<Self> {
        let psi = solve_psi();
        let (b1, b2) = solve_b_roots()?;
        let a = derive_a(b2);
        let c = derive_c(a, b2);
        Ok(CriticalConstants {
            psi,
            b1,
            b2,
            a,
            c,
            alpha: DEFAULT_ALPHA,
        })
    }
}

/// `(3 - √5) / 2`, the smaller root of `x² - 3x + 1`.
pub fn solve_psi() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

/// `h(x)(2 - h(x)) - h(2x - x²)`, whose two interior roots define the
/// extremal two-point law.
pub fn sharpness_residual(x: f64) -> f64 {
    let hx = h(x);
    hx * (2.0 - hx) - h(2.0 * x - x * x)
}

fn sharpness_residual_prime(x: f64) -> f64 {
    let hx = h(x);
    let u = 2.0 * x - x * x;
    h_prime(x) * (2.0 - 2.0 * hx) - h_prime(u) * (2.0 - 2.0 * x)
}

/// Bisection down to `1e-15` bracket width followed by a few Newton steps.
/// Newton iterates that leave the bracket or increase the residual are
/// discarded.
pub fn bisect_then_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let mut flo = f(lo);
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..NEWTON_STEPS {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(a - BISECTION_WIDTH..=b + BISECTION_WIDTH).contains(&next) {
            break;
        }
        let fn_ = f(next);
        if fn_.abs() > fx.abs() {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

fn find_bracket(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, what: &str) -> Result<(f64, f64)> {
    let step = (hi - lo) / BRACKET_SCAN as f64;
    // Open interval: nudge the first sample off the endpoint.
    let mut x0 = lo + step * 1e-3;
    let mut f0 = f(x0);
    for k in 1..BRACKET_SCAN {
        let x1 = lo + step * k as f64;
        let f1 = f(x1);
        if f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0) {
            return Ok((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    let x1 = hi - step * 1e-3;
    if (f0 < 0.0) != (f(x1) < 0.0) {
        return Ok((x0, x1));
    }
    Err(Error::Bracket {
        what: what.to_string(),
        lo,
        hi,
    })
}

/// The roots `b₁ < b₂` of [`sharpness_residual`] on `(0, 0.2)` and `(0.2, 0.5)`.
pub fn solve_b_roots() -> Result<(f64, f64)> {
    let f = sharpness_residual;
    let (l1, h1) = find_bracket(&f, 0.0, 0.2, "b1")?;
    let (l2, h2) = find_bracket(&f, 0.2, 0.5, "b2")?;
    let b1 = bisect_then_newton(f, sharpness_residual_prime, l1, h1);
    let b2 = bisect_then_newton(f, sharpness_residual_prime, l2, h2);
    Ok((b1, b2))
}

/// Mass at `1` that makes the two-point law `{b: 1-a, 1: a}` satisfy
/// `(1-a) h(b) = 1 - 2a`.
pub fn derive_a(b: f64) -> f64 {
    let hb = h(b);
    (1.0 - hb) / (2.0 - hb)
}

/// Expectation of `{b: 1-a, 1: a}`.
pub fn derive_c(a: f64, b: f64) -> f64 {
    a + (1.0 - a) * b
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SharpnessReport {
    pub a: f64,
    pub b: f64,
    /// `(1-a)² h(2b - b²)`
    pub independent: f64,
    /// `(1-a) h(b)`
    pub self_term: f64,
    /// `1 - 2a`
    pub coupled: f64,
    pub independent_vs_coupled: f64,
    pub self_vs_coupled: f64,
    pub independent_vs_self: f64,
}

impl SharpnessReport {
    pub fn max_difference(&self) -> f64 {
        self.independent_vs_coupled
            .max(self.self_vs_coupled)
            .max(self.independent_vs_self)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_difference() <= tol
    }
}

/// Evaluates the three quantities that coincide at the extremal law
/// `{b: 1-a, 1: a}`.
pub fn sharpness_identity_at(a: f64, b: f64) -> SharpnessReport {
    let independent = (1.0 - a).powi(2) * h(2.0 * b - b * b);
    let self_term = (1.0 - a) * h(b);
    let coupled = 1.0 - 2.0 * a;
    SharpnessReport {
        a,
        b,
        independent,
        self_term,
        coupled,
        independent_vs_coupled: (independent - coupled).abs(),
        self_vs_coupled: (self_term - coupled).abs(),
        independent_vs_self: (independent - self_term).abs(),
    }
}

/// [`sharpness_identity_at`] evaluated at `(derive_a(b₂), b₂)`.
pub fn sharpness_identity_check() -> Result<SharpnessReport> {
    let (_, b2) = solve_b_roots()?;
    Ok(sharpness_identity_at(derive_a(b2), b2))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn psi() {
        let psi = solve_psi();
        assert_abs_diff_eq!(psi, 0.3819660112501051, epsilon = 1e-15);
        assert!((psi * psi - 3.0 * psi + 1.0).abs() <= 1e-14);
        assert!((h(2.0 * psi - psi * psi) - h(1.0 - psi)).abs() <= 1e-14);
        assert!((2.0 * psi - psi * psi - (1.0 - psi)).abs() <= 1e-14);
    }

    #[test]
    fn b_roots_match_reference_digits() {
        let (b1, b2) = solve_b_roots().unwrap();
        assert_abs_diff_eq!(b1, reference::B1, epsilon = 1e-12);
        assert_abs_diff_eq!(b2, reference::B2, epsilon = 1e-12);
        assert!(sharpness_residual(b1).abs() <= 1e-14);
        assert!(sharpness_residual(b2).abs() <= 1e-14);
        assert!(0.0 < b1 && b1 < b2 && b2 < 0.5);
    }

    #[test]
    fn roots_are_simple() {
        let (b1, b2) = solve_b_roots().unwrap();
        for b in [b1, b2] {
            let left = sharpness_residual(b - 1e-6);
            let right = sharpness_residual(b + 1e-6);
            assert!(left * right < 0.0);
        }
        // Between the roots the residual is negative.
        assert!(sharpness_residual(0.25) < 0.0);
        assert_abs_diff_eq!(sharpness_residual(0.25), -0.024315354596160077, epsilon = 1e-12);
    }

    #[test]
    fn a_and_c() {
        let (_, b2) = solve_b_roots().unwrap();
        let a = derive_a(b2);
        assert_abs_diff_eq!(a, reference::A, epsilon = 1e-12);
        assert_eq!(derive_a(0.5), 0.0);
        let hq = h(0.25);
        assert_abs_diff_eq!(derive_a(0.25), (1.0 - hq) / (2.0 - hq), epsilon = 1e-16);
        assert_abs_diff_eq!(derive_c(reference::A, reference::B2), reference::C, epsilon = 1e-12);
        assert_abs_diff_eq!(derive_c(a, b2), reference::C, epsilon = 1e-12);
        assert_eq!(derive_c(0.0, 0.3), 0.3);
        assert_eq!(derive_c(1.0, 0.3), 1.0);
        // (1-a) h(b) = 1 - 2a is the defining relation of a.
        assert_abs_diff_eq!((1.0 - a) * h(b2), 1.0 - 2.0 * a, epsilon = 1e-15);
    }

    #[test]
    fn constants_struct_invariants() {
        let k = CriticalConstants::compute().unwrap();
        assert!(0.0 < k.b1 && k.b1 < k.b2 && k.b2 < 0.5);
        assert!(0.0 < k.a && k.a < 0.5);
        assert!((k.c - (k.a + (1.0 - k.a) * k.b2)).abs() <= 1e-12);
        assert!(0.0 < k.alpha && k.alpha < 1.0);
        assert!(k.psi < k.c);
    }

    #[test]
    fn sharpness_identity() {
        let r = sharpness_identity_check().unwrap();
        assert!(r.self_vs_coupled <= 1e-12, "{r:?}");
        assert!(r.independent_vs_coupled <= 1e-12, "{r:?}");
        let off = sharpness_identity_at(r.a, r.b + 0.01);
        assert!(off.independent_vs_coupled > 1e-6, "{off:?}");
        assert!(off.self_vs_coupled > 1e-6, "{off:?}");
        assert!(off.independent_vs_self > 1e-6, "{off:?}");
    }

    #[test]
    fn bisect_then_newton_on_polynomial() {
        let r = bisect_then_newton(|x| x * x - 2.0, |x| 2.0 * x, 1.0, 2.0);
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-15);
    }
}
