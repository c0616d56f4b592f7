//! Binary and Shannon entropy in bits.
//!
//! `0 · log₂ 0` is taken to be `0` through an explicit zero-mass branch, never
//! through floating point limits.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed outside `[0, 1]` before a value is rejected. Values inside
/// the slack are clamped.
pub const PROB_SLACK: f64 = 1e-15;

/// Tolerance on the total mass of a finite law.
pub const MASS_TOL: f64 = 1e-12;

/// A scalar probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Prob(f64);

impl Prob {
    pub const ZERO: Prob = Prob(0.0);
    pub const ONE: Prob = Prob(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&value) {
            return Err(Error::Domain { value });
        }
        Ok(Prob(value.clamp(0.0, 1.0)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Binary entropy of a coin with this bias.
    #[inline]
    pub fn entropy(self) -> f64 {
        h(self.0)
    }
}

impl TryFrom<f64> for Prob {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Prob::new(value)
    }
}

impl From<Prob> for f64 {
    fn from(p: Prob) -> f64 {
        p.0
    }
}

/// Binary entropy `h(p) = -p log₂ p - (1-p) log₂(1-p)`.
pub fn binary_entropy(p: Prob) -> f64 {
    h(p.0)
}

/// Unchecked binary entropy used on hot paths. Arguments outside `(0, 1)`
/// evaluate to `0`, which matches `h(0) = h(1) = 0` after clamping.
#[inline]
pub fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let y = 1.0 - x;
    -(x * x.log2() + y * y.log2())
}

/// Derivative `h'(x) = log₂((1-x)/x)` on `(0, 1)`.
#[inline]
pub fn h_prime(x: f64) -> f64 {
    ((1.0 - x) / x).log2()
}

/// `-m log₂ m` with the zero-mass convention.
#[inline]
pub(crate) fn surprisal_term(m: f64) -> f64 {
    if m > 0.0 {
        -m * m.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a list of masses. Zero masses are skipped.
pub fn entropy_of_masses<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    masses.into_iter().map(surprisal_term).sum()
}

/// `p + q - pq`, the probability that at least one of two independent events
/// with probabilities `p` and `q` happens.
pub fn union_param(p: Prob, q: Prob) -> Prob {
    let v = p.0 + q.0 - p.0 * q.0;
    Prob(v.clamp(0.0, 1.0))
}

/// A finitely supported law over opaque labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw<L> {
    outcomes: Vec<(L, f64)>,
}

impl<L: Eq + Hash + Clone> FiniteLaw<L> {
    /// Builds a law from `(label, mass)` pairs. Zero masses are dropped;
    /// negative masses and repeated labels are rejected.
    pub fn new(outcomes: Vec<(L, f64)>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(outcomes.len());
        let mut kept = Vec::with_capacity(outcomes.len());
        let mut total = 0.0;
        for (label, mass) in outcomes {
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(Error::InvalidLaw(format!("mass {mass} is not a nonnegative number")));
            }
            if seen.insert(label.clone(), ()).is_some() {
                return Err(Error::InvalidLaw("repeated label".into()));
            }
            total += mass;
            if mass > 0.0 {
                kept.push((label, mass));
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidLaw(format!("masses sum to {total}, expected 1")));
        }
        Ok(FiniteLaw { outcomes: kept })
    }

    /// Accumulates masses of repeated labels, then validates.
    pub fn from_accumulated<I: IntoIterator<Item = (L, f64)>>(items: I) -> Result<Self> {
        let mut order = Vec::new();
        let mut acc: HashMap<L, f64> = HashMap::new();
        for (label, mass) in items {
            match acc.get_mut(&label) {
                Some(m) => *m += mass,
                None => {
                    order.push(label.clone());
                    acc.insert(label, mass);
                }
            }
        }
        let outcomes = order
            .into_iter()
            .map(|l| {
                let m = acc[&l];
                (l, m)
            })
            .collect();
        Self::new(outcomes)
    }

    pub fn outcomes(&self) -> &[(L, f64)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn mass_of(&self, label: &L) -> f64 {
        self.outcomes
            .iter()
            .find(|(l, _)| l == label)
            .map_or(0.0, |(_, m)| *m)
    }

    /// Pushes the law forward through `f`.
    pub fn map<M: Eq + Hash + Clone>(&self, mut f: impl FnMut(&L) -> M) -> FiniteLaw<M> {
        let mut order = Vec::new();
        let mut acc: HashMap<M, f64> = HashMap::new();
        for (l, m) in &self.outcomes {
            let key = f(l);
            match acc.get_mut(&key) {
                Some(v) => *v += m,
                None => {
                    order.push(key.clone());
                    acc.insert(key, *m);
                }
            }
        }
        FiniteLaw {
            outcomes: order
                .into_iter()
                .map(|k| {
                    let m = acc[&k];
                    (k, m)
                })
                .collect(),
        }
    }
}

/// Shannon entropy `H = -Σ m log₂ m` in bits.
pub fn shannon_entropy<L>(law: &FiniteLaw<L>) -> f64 {
    entropy_of_masses(law.outcomes.iter().map(|(_, m)| *m))
}

/// Conditional entropy `H(Y | X)` of a joint law on pairs `(x, y)`.
pub fn conditional_entropy<X, Y>(joint: &FiniteLaw<(X, Y)>) -> f64
where
    X: Eq + Hash + Clone,
    Y: Eq + Hash + Clone,
{
    let mut marginal: HashMap<&X, f64> = HashMap::new();
    for ((x, _), m) in &joint.outcomes {
        *marginal.entry(x).or_insert(0.0) += m;
    }
    joint
        .outcomes
        .iter()
        .map(|((x, _), m)| {
            if *m > 0.0 {
                m * (marginal[x] / m).log2()
            } else {
                0.0
            }
        })
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn p(x: f64) -> Prob {
        Prob::new(x).unwrap()
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(p(0.5)), 1.0);
        assert_eq!(binary_entropy(p(0.0)), 0.0);
        assert_eq!(binary_entropy(p(1.0)), 0.0);
        assert_abs_diff_eq!(binary_entropy(p(0.25)), 2.0 - 0.75 * 3f64.log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(p(0.25)), 0.8112781245, epsilon = 1e-10);
    }

    #[test]
    fn slack_is_clamped_and_beyond_is_rejected() {
        assert_eq!(p(-1e-16).value(), 0.0);
        assert_eq!(p(1.0 + 5e-16).value(), 1.0);
        assert!(matches!(Prob::new(-1e-9), Err(Error::Domain { .. })));
        assert!(Prob::new(1.01).is_err());
        assert!(Prob::new(f64::NAN).is_err());
    }

    #[test]
    fn shannon_entropy_examples() {
        let uniform = FiniteLaw::new(vec![(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&uniform), 2.0, epsilon = 1e-15);
        let point = FiniteLaw::new(vec![("x", 1.0)]).unwrap();
        assert_eq!(shannon_entropy(&point), 0.0);
        let skew = FiniteLaw::new(vec![('a', 0.5), ('b', 0.25), ('c', 0.25)]).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&skew), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn law_validation() {
        assert!(FiniteLaw::new(vec![(0, 0.5), (0, 0.5)]).is_err());
        assert!(FiniteLaw::new(vec![(0, 0.5), (1, 0.4)]).is_err());
        assert!(FiniteLaw::new(vec![(0, 1.5), (1, -0.5)]).is_err());
        let law = FiniteLaw::from_accumulated(vec![(0, 0.25), (1, 0.5), (0, 0.25)]).unwrap();
        assert_eq!(law.len(), 2);
        assert_abs_diff_eq!(law.mass_of(&0), 0.5);
    }

    #[test]
    fn conditional_entropy_examples() {
        let diag = FiniteLaw::new(vec![((0, 0), 0.5), ((1, 1), 0.5)]).unwrap();
        assert_abs_diff_eq!(conditional_entropy(&diag), 0.0, epsilon = 1e-15);

        let indep = FiniteLaw::new(vec![
            ((0, 0), 0.25),
            ((0, 1), 0.25),
            ((1, 0), 0.25),
            ((1, 1), 0.25),
        ])
        .unwrap();
        assert_abs_diff_eq!(conditional_entropy(&indep), 1.0, epsilon = 1e-15);

        // Defining sum evaluated term by term: Pr(X=0) = 3/4, Pr(X=1) = 1/4.
        let joint = FiniteLaw::new(vec![((0, 0), 0.5), ((0, 1), 0.25), ((1, 1), 0.25)]).unwrap();
        let brute = -(0.5 * (0.5f64 / 0.75).log2() + 0.25 * (0.25f64 / 0.75).log2() + 0.25 * (0.25f64 / 0.25).log2());
        assert_abs_diff_eq!(conditional_entropy(&joint), brute, epsilon = 1e-14);
        // Equivalently 3/4 · h(1/3).
        assert_abs_diff_eq!(conditional_entropy(&joint), 0.75 * h(1.0 / 3.0), epsilon = 1e-14);
    }

    #[test]
    fn union_param_examples() {
        assert_eq!(union_param(Prob::ZERO, p(0.37)).value(), 0.37);
        assert_eq!(union_param(Prob::ONE, p(0.37)).value(), 1.0);
        assert_abs_diff_eq!(union_param(p(0.3), p(0.3)).value(), 0.51, epsilon = 1e-15);
    }

    fn small_joint() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 2..12).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-3)
    }

    proptest! {
        #[test]
        fn symmetry(x in 0.0f64..=1.0) {
            prop_assert!((h(x) - h(1.0 - x)).abs() <= 1e-14);
        }

        #[test]
        fn union_identity(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            let u = union_param(p(x), p(y)).value();
            prop_assert!((h(u) - h((1.0 - x) * (1.0 - y))).abs() <= 1e-13);
        }

        #[test]
        fn concavity(a in 0.0f64..=1.0, b in 0.0f64..=1.0, lambda in 0.0f64..=1.0) {
            let mix = h(lambda * a + (1.0 - lambda) * b);
            prop_assert!(mix >= lambda * h(a) + (1.0 - lambda) * h(b) - 1e-12);
        }

        #[test]
        fn entropy_bounded_by_log_support(raw in small_joint()) {
            let total: f64 = raw.iter().sum();
            let law = FiniteLaw::new(raw.iter().enumerate().map(|(i, m)| (i, m / total)).collect()).unwrap();
            prop_assert!(shannon_entropy(&law) <= (law.len().max(1) as f64).log2() + 1e-12);
        }

        #[test]
        fn chain_rule(raw in small_joint(), width in 1usize..4) {
            let total: f64 = raw.iter().sum();
            let joint = FiniteLaw::new(
                raw.iter().enumerate().map(|(i, m)| ((i / width, i % width), m / total)).collect(),
            ).unwrap();
            let hx = shannon_entropy(&joint.map(|(x, _)| *x));
            let hxy = shannon_entropy(&joint);
            let hy_x = conditional_entropy(&joint);
            prop_assert!((hxy - hx - hy_x).abs() <= 1e-12);
            prop_assert!(hy_x <= hxy + 1e-12);
        }
    }
}
