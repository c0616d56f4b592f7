//! Finitely supported laws on `[0, 1]`, couplings with identical marginals,
//! and the mass-redistribution operators that clear the interval `(1/2, 1)`.

use serde::{Deserialize, Serialize};

use crate::entropy::{h, MASS_TOL, PROB_SLACK};
use crate::error::{Error, Result};
use crate::functional::{term_independent, term_self};

/// Atoms whose values are closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

/// A finitely supported probability law on `[0, 1]` with strictly increasing
/// atom values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct Dist {
    atoms: Vec<Atom>,
}

impl Dist {
    /// Builds a law from `(value, mass)` pairs. Atoms are sorted, values
    /// closer than [`MERGE_TOL`] are merged and zero masses dropped.
    pub fn new<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut total = 0.0;
        for (value, mass) in pairs {
            if !value.is_finite() || !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&value) {
                return Err(Error::InvalidDist(format!("value {value} outside [0, 1]")));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDist(format!("mass {mass} is negative")));
            }
            total += mass;
            if mass > 0.0 {
                atoms.push(Atom {
                    value: value.clamp(0.0, 1.0),
                    mass,
                });
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDist(format!("masses sum to {total}, expected 1")));
        }
        Ok(Dist {
            atoms: merge_sorted(atoms),
        })
    }

    pub fn point(value: f64) -> Result<Self> {
        Dist::new([(value, 1.0)])
    }

    /// `{b: 1-a, 1: a}`.
    pub fn two_point(b: f64, a: f64) -> Result<Self> {
        Dist::new([(b, 1.0 - a), (1.0, a)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn expectation(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.mass).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn mass_at(&self, value: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| (a.value - value).abs() < MERGE_TOL)
            .map_or(0.0, |a| a.mass)
    }

    /// `Pr(p = 1)`.
    pub fn mass_at_one(&self) -> f64 {
        self.mass_at(1.0)
    }

    pub fn has_atom_in_upper_interval(&self) -> bool {
        self.atoms.iter().any(|a| in_upper_interval(a.value))
    }

    /// Replaces the atom at `y ∈ (1/2, 1)` by mass `(2y-1)·m` at `1` and
    /// `(2-2y)·m` at `1/2`. The mean is unchanged.
    pub fn reduce_upper_atom(&self, y: f64) -> Result<Dist> {
        if !in_upper_interval(y) {
            return Err(Error::Precondition(format!("{y} is not in (0.5, 1)")));
        }
        let idx = self
            .atoms
            .iter()
            .position(|a| (a.value - y).abs() < MERGE_TOL)
            .ok_or_else(|| Error::Precondition(format!("{y} is not an atom")))?;
        let m = self.atoms[idx].mass;
        let y = self.atoms[idx].value;
        let mut atoms: Vec<Atom> = self.atoms.clone();
        atoms.remove(idx);
        atoms.push(Atom {
            value: 1.0,
            mass: (2.0 * y - 1.0) * m,
        });
        atoms.push(Atom {
            value: 0.5,
            mass: (2.0 - 2.0 * y) * m,
        });
        atoms.retain(|a| a.mass > 0.0);
        Ok(Dist {
            atoms: merge_sorted(atoms),
        })
    }

    /// Applies [`Dist::reduce_upper_atom`] to every atom in `(1/2, 1)`.
    pub fn strip_upper_interval(&self) -> Dist {
        let mut out = self.clone();
        let targets: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| a.value)
            .filter(|&v| in_upper_interval(v))
            .collect();
        for y in targets {
            out = out
                .reduce_upper_atom(y)
                .expect("target atoms were taken from the law itself");
        }
        out
    }
}

impl TryFrom<Vec<Atom>> for Dist {
    type Error = Error;

    fn try_from(atoms: Vec<Atom>) -> Result<Self> {
        Dist::new(atoms.into_iter().map(|a| (a.value, a.mass)))
    }
}

impl From<Dist> for Vec<Atom> {
    fn from(d: Dist) -> Self {
        d.atoms
    }
}

fn in_upper_interval(v: f64) -> bool {
    v > 0.5 + MERGE_TOL && v < 1.0 - MERGE_TOL
}

fn merge_sorted(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if a.value - last.value < MERGE_TOL => last.mass += a.mass,
            _ => out.push(a),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    pub mass: f64,
}

/// A joint law of `(p, r)` whose two marginals coincide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    cells: Vec<Cell>,
    marginal: Dist,
}

impl Coupling {
    /// Validates that both marginals agree atom by atom within `1e-12`.
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        let cells: Vec<Cell> = cells.into_iter().filter(|c| c.mass > 0.0).collect();
        let first = Dist::new(cells.iter().map(|c| (c.x, c.mass)))
            .map_err(|e| Error::InvalidCoupling(e.to_string()))?;
        let second = Dist::new(cells.iter().map(|c| (c.y, c.mass)))
            .map_err(|e| Error::InvalidCoupling(e.to_string()))?;
        if first.len() != second.len()
            || first
                .atoms
                .iter()
                .zip(&second.atoms)
                .any(|(a, b)| (a.value - b.value).abs() >= MERGE_TOL || (a.mass - b.mass).abs() > MASS_TOL)
        {
            return Err(Error::InvalidCoupling("marginals differ".into()));
        }
        Ok(Coupling {
            cells,
            marginal: first,
        })
    }

    /// The independent coupling `d ⊗ d`.
    pub fn independent(d: &Dist) -> Coupling {
        let cells = d
            .atoms
            .iter()
            .flat_map(|a| {
                d.atoms.iter().map(move |b| Cell {
                    x: a.value,
                    y: b.value,
                    mass: a.mass * b.mass,
                })
            })
            .collect();
        Coupling {
            cells,
            marginal: d.clone(),
        }
    }

    /// Everything on the diagonal.
    pub fn diagonal(d: &Dist) -> Coupling {
        let cells = d
            .atoms
            .iter()
            .map(|a| Cell {
                x: a.value,
                y: a.value,
                mass: a.mass,
            })
            .collect();
        Coupling {
            cells,
            marginal: d.clone(),
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn marginal(&self) -> &Dist {
        &self.marginal
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }

    pub fn mass_at(&self, x: f64, y: f64) -> f64 {
        self.cells
            .iter()
            .filter(|c| (c.x - x).abs() < MERGE_TOL && (c.y - y).abs() < MERGE_TOL)
            .map(|c| c.mass)
            .sum()
    }

    pub fn off_diagonal_mass(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| (c.x - c.y).abs() >= MERGE_TOL)
            .map(|c| c.mass)
            .sum()
    }

    /// One step of the coupled redistribution: the largest atom `y` in
    /// `(1/2, 1)` is split between the next lower value `y'` (the second
    /// largest atom in `(1/2, 1)`, or `1/2`) and `1`, with mean-preserving
    /// weights, applied to both coordinates jointly. Returns `None` when no
    /// atom lies in `(1/2, 1)`.
    pub fn redistribute_upper_step(&self) -> Option<Coupling> {
        let upper: Vec<f64> = self
            .marginal
            .atoms
            .iter()
            .map(|a| a.value)
            .filter(|&v| in_upper_interval(v))
            .collect();
        let &y = upper.last()?;
        let y_low = if upper.len() >= 2 { upper[upper.len() - 2] } else { 0.5 };
        let to_low = (1.0 - y) / (1.0 - y_low);
        let to_one = 1.0 - to_low;

        let is_y = |v: f64| (v - y).abs() < MERGE_TOL;
        let mut cells = Vec::with_capacity(self.cells.len() * 2);
        for c in &self.cells {
            match (is_y(c.x), is_y(c.y)) {
                (false, false) => cells.push(*c),
                (true, true) => {
                    cells.push(Cell { x: y_low, y: y_low, mass: to_low * c.mass });
                    cells.push(Cell { x: 1.0, y: 1.0, mass: to_one * c.mass });
                }
                (true, false) => {
                    cells.push(Cell { x: y_low, y: c.y, mass: to_low * c.mass });
                    cells.push(Cell { x: 1.0, y: c.y, mass: to_one * c.mass });
                }
                (false, true) => {
                    cells.push(Cell { x: c.x, y: y_low, mass: to_low * c.mass });
                    cells.push(Cell { x: c.x, y: 1.0, mass: to_one * c.mass });
                }
            }
        }
        let marginal = Dist::new(cells.iter().map(|c| (c.x, c.mass)))
            .expect("redistribution keeps a probability law");
        Some(Coupling { cells, marginal })
    }
}

/// Position of the diagonal quantile in [`quantile_coupling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileCouplingSpec {
    /// `Pr(p = 1)`.
    pub a: f64,
    /// Smallest value with `Pr(p ≤ x₀) ≥ 1 - 2a`.
    pub x0: f64,
}

/// The extremal coupling with `Pr(p = r) = 1 - 2a`, the diagonal filled from
/// the bottom of the support, and every remaining unit of mass below `1`
/// paired against `1`. No mass lands on `(1, 1)`.
pub fn quantile_coupling(d: &Dist) -> Result<Coupling> {
    Ok(quantile_coupling_with_spec(d)?.0)
}

pub fn quantile_coupling_with_spec(d: &Dist) -> Result<(Coupling, QuantileCouplingSpec)> {
    if d.has_atom_in_upper_interval() {
        return Err(Error::Precondition("support meets (0.5, 1)".into()));
    }
    let a = d.mass_at_one();
    if a > 0.5 + MASS_TOL {
        return Err(Error::Precondition(format!("Pr(p = 1) = {a} exceeds 1/2")));
    }
    let target = (1.0 - 2.0 * a).max(0.0);
    let mut remaining_diag = target;
    let mut cumulative = 0.0;
    let mut x0 = f64::NAN;
    let mut cells = Vec::with_capacity(3 * d.len());
    for atom in d.atoms.iter().filter(|at| at.value < 1.0 - MERGE_TOL) {
        cumulative += atom.mass;
        if x0.is_nan() && cumulative >= target - MASS_TOL {
            x0 = atom.value;
        }
        let mut diag = atom.mass.min(remaining_diag);
        if atom.mass - diag <= MASS_TOL * 1e-3 {
            // Rounding residue from the running quantile.
            diag = atom.mass;
        }
        remaining_diag = (remaining_diag - diag).max(0.0);
        if diag > 0.0 {
            cells.push(Cell { x: atom.value, y: atom.value, mass: diag });
        }
        let rest = atom.mass - diag;
        if rest > 0.0 {
            cells.push(Cell { x: atom.value, y: 1.0, mass: rest });
            cells.push(Cell { x: 1.0, y: atom.value, mass: rest });
        }
    }
    Ok((
        Coupling {
            cells,
            marginal: d.clone(),
        },
        QuantileCouplingSpec { a, x0 },
    ))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `w E[h(p')] - E[h(p'+q'-p'q')]` against the same expression for
/// the original law, where `p'` is the law after
/// [`Dist::reduce_upper_atom`]`(y)`.
pub fn reduction_direction_check(d: &Dist, y: f64, w: f64) -> Result<ReductionReport> {
    if d.expectation() > 0.39 {
        return Err(Error::Precondition(format!("E[p] = {} exceeds 0.39", d.expectation())));
    }
    if w > 1.044 {
        return Err(Error::Precondition(format!("w = {w} exceeds 1.044")));
    }
    let reduced = d.reduce_upper_atom(y)?;
    let lhs = w * term_self(&reduced) - term_independent(&reduced);
    let rhs = w * term_self(d) - term_independent(d);
    Ok(ReductionReport {
        lhs,
        rhs,
        holds: lhs > rhs,
    })
}

/// `g(x) = (2-2y) h((1-x)/2) - h((1-y)(1-x))`, the first-order change of the
/// independent term per unit of redistributed mass.
pub fn reduction_gain(x: f64, y: f64) -> f64 {
    (2.0 - 2.0 * y) * h(0.5 * (1.0 - x)) - h((1.0 - y) * (1.0 - x))
}

/// Closed form of `ln 2 · dg/dx`.
pub fn reduction_gain_slope(x: f64, y: f64) -> f64 {
    (y - 1.0) * ((1.0 - y) * (1.0 + x) / (x + y - x * y)).ln()
}

/// Closed form of `ln 2 · d²g/dx²`.
pub fn reduction_gain_curvature(x: f64, y: f64) -> f64 {
    -(1.0 - y) * (2.0 * y - 1.0) / ((x + 1.0) * (x + y - x * y))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KaramataReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `g(x+y) + g(x'+y') ≥ g(x+y') + g(x'+y)` for `g(t) = h(min(t, 1/2))`,
/// `x < x'`, `y > y'`. Equal pairs are accepted as the boundary case.
pub fn karamata_claim_check(x: f64, x_hi: f64, y: f64, y_lo: f64) -> Result<KaramataReport> {
    let inside = |v: f64| (0.0..=0.5).contains(&v);
    if !(inside(x) && inside(x_hi) && inside(y) && inside(y_lo)) {
        return Err(Error::Precondition("arguments must lie in [0, 1/2]".into()));
    }
    if x > x_hi || y < y_lo {
        return Err(Error::Precondition("need x ≤ x' and y ≥ y'".into()));
    }
    let g = |t: f64| h(t.min(0.5));
    let lhs = g(x + y) + g(x_hi + y_lo);
    let rhs = g(x + y_lo) + g(x_hi + y);
    Ok(KaramataReport {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::constants::{derive_a, reference};

    fn dist(pairs: &[(f64, f64)]) -> Dist {
        Dist::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn expectation_examples() {
        assert_abs_diff_eq!(Dist::point(0.3).unwrap().expectation(), 0.3);
        assert_abs_diff_eq!(dist(&[(0.0, 0.5), (1.0, 0.5)]).expectation(), 0.5);
        let b = reference::B2;
        let sharp = Dist::two_point(b, derive_a(b)).unwrap();
        assert_abs_diff_eq!(sharp.expectation(), reference::C, epsilon = 1e-12);
    }

    #[test]
    fn validation_and_merging() {
        assert!(Dist::new([(0.2, 0.5), (0.3, 0.4)]).is_err());
        assert!(Dist::new([(1.2, 1.0)]).is_err());
        assert!(Dist::new([(0.2, 1.2), (0.3, -0.2)]).is_err());
        let d = dist(&[(0.3, 0.25), (0.1, 0.5), (0.3 + 1e-14, 0.25)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.atoms()[0].value, 0.1);
        assert_abs_diff_eq!(d.mass_at(0.3), 0.5);
    }

    #[test]
    fn json_shape() {
        let d: Dist = serde_json::from_str(r#"[{"value":0.6,"mass":0.5},{"value":0.3,"mass":0.5}]"#).unwrap();
        assert_eq!(d.atoms()[0].value, 0.3);
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"[{"value":0.3,"mass":0.5},{"value":0.6,"mass":0.5}]"#);
        assert!(serde_json::from_str::<Dist>(r#"[{"value":0.3,"mass":0.4}]"#).is_err());
    }

    #[test]
    fn reduce_upper_atom_examples() {
        let d = Dist::point(0.75).unwrap().reduce_upper_atom(0.75).unwrap();
        assert_eq!(d.len(), 2);
        assert_abs_diff_eq!(d.mass_at(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mass_at(1.0), 0.5, epsilon = 1e-15);
        assert!(Dist::point(0.75).unwrap().reduce_upper_atom(0.7).is_err());
        assert!(dist(&[(0.4, 1.0)]).reduce_upper_atom(0.4).is_err());
    }

    #[test]
    fn strip_upper_interval_examples() {
        let plain = dist(&[(0.2, 0.5), (0.5, 0.25), (1.0, 0.25)]);
        assert_eq!(plain.strip_upper_interval(), plain);

        let d = dist(&[(0.6, 0.5), (0.3, 0.5)]).strip_upper_interval();
        assert_eq!(d.len(), 3);
        assert_abs_diff_eq!(d.mass_at(0.3), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mass_at(0.5), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mass_at(1.0), 0.1, epsilon = 1e-15);

        let d = Dist::point(0.75).unwrap().strip_upper_interval();
        assert_abs_diff_eq!(d.mass_at(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mass_at(1.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn quantile_coupling_sharpness_shape() {
        let b = reference::B2;
        let a = derive_a(b);
        let d = Dist::two_point(b, a).unwrap();
        let (cp, spec) = quantile_coupling_with_spec(&d).unwrap();
        assert_abs_diff_eq!(cp.mass_at(b, b), 1.0 - 2.0 * a, epsilon = 1e-15);
        assert_abs_diff_eq!(cp.mass_at(b, 1.0), a, epsilon = 1e-15);
        assert_abs_diff_eq!(cp.mass_at(1.0, b), a, epsilon = 1e-15);
        assert_eq!(cp.mass_at(1.0, 1.0), 0.0);
        assert_eq!(spec.x0, b);
        assert_abs_diff_eq!(spec.a, a);
    }

    #[test]
    fn quantile_coupling_point_mass_is_diagonal() {
        let d = Dist::point(0.2).unwrap();
        let cp = quantile_coupling(&d).unwrap();
        assert_eq!(cp.cells().len(), 1);
        assert_abs_diff_eq!(cp.mass_at(0.2, 0.2), 1.0);
    }

    #[test]
    fn quantile_coupling_rejects_heavy_top() {
        assert!(quantile_coupling(&dist(&[(0.1, 0.4), (1.0, 0.6)])).is_err());
        assert!(quantile_coupling(&dist(&[(0.7, 0.4), (0.1, 0.6)])).is_err());
        // a = 1/2 exactly: nothing on the diagonal.
        let cp = quantile_coupling(&dist(&[(0.1, 0.5), (1.0, 0.5)])).unwrap();
        assert_eq!(cp.off_diagonal_mass(), 1.0);
    }

    #[test]
    fn quantile_coupling_degenerate_quantile_omits_atom() {
        // Pr(p < 0.3) = 0.6 = 1 - 2a exactly, so 0.3 carries no diagonal mass.
        let d = dist(&[(0.1, 0.6), (0.3, 0.2), (1.0, 0.2)]);
        let cp = quantile_coupling(&d).unwrap();
        assert_eq!(cp.mass_at(0.3, 0.3), 0.0);
        assert_abs_diff_eq!(cp.mass_at(0.3, 1.0), 0.2, epsilon = 1e-15);
        assert!(Coupling::new(cp.cells().to_vec()).is_ok());
    }

    #[test]
    fn coupling_validation() {
        let bad = vec![Cell { x: 0.1, y: 0.2, mass: 1.0 }];
        assert!(Coupling::new(bad).is_err());
        let ok = vec![Cell { x: 0.1, y: 0.2, mass: 0.5 }, Cell { x: 0.2, y: 0.1, mass: 0.5 }];
        assert!(Coupling::new(ok).is_ok());
    }

    #[test]
    fn reduction_gain_examples() {
        for y in [0.51, 0.6, 0.75, 0.9, 0.99] {
            assert_eq!(reduction_gain(1.0, y), 0.0);
            assert!(reduction_gain(0.0, y) < 0.0);
            assert!(2.0 * reduction_gain(0.39, y) - 1.044 * reduction_gain(0.0, y) < 0.0, "y = {y}");
        }
    }

    #[test]
    fn reduction_examples() {
        let d = dist(&[(0.9, 0.2), (0.1, 0.8)]);
        assert_abs_diff_eq!(d.expectation(), 0.26, epsilon = 1e-15);
        assert!(reduction_direction_check(&d, 0.9, 1.044).unwrap().holds);
        assert!(reduction_direction_check(&d, 0.9, 1.0).unwrap().holds);
        assert!(reduction_direction_check(&d, 0.9, 1.05).is_err());
        assert!(reduction_direction_check(&dist(&[(0.9, 0.5), (0.1, 0.5)]), 0.9, 1.0).is_err());
    }

    #[test]
    fn karamata_examples() {
        assert!(karamata_claim_check(0.1, 0.2, 0.3, 0.15).unwrap().holds);
        let r = karamata_claim_check(0.1, 0.2, 0.3, 0.3).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(karamata_claim_check(0.2, 0.1, 0.3, 0.15).is_err());
        assert!(karamata_claim_check(0.1, 0.6, 0.3, 0.15).is_err());
    }

    #[test]
    fn redistribution_step_moves_largest_upper_atom() {
        let d = dist(&[(0.2, 0.4), (0.6, 0.3), (0.8, 0.3)]);
        let cp = Coupling::independent(&d);
        let next = cp.redistribute_upper_step().unwrap();
        assert_eq!(next.marginal().mass_at(0.8), 0.0);
        assert_abs_diff_eq!(next.marginal().expectation(), d.expectation(), epsilon = 1e-14);
        assert!(Coupling::new(next.cells().to_vec()).is_ok());
        let last = next.redistribute_upper_step().unwrap();
        assert!(!last.marginal().has_atom_in_upper_interval());
        assert!(last.redistribute_upper_step().is_none());
    }

    fn random_dist(rng: &mut ChaCha8Rng, k: usize) -> Dist {
        let raw: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen::<f64>(), rng.gen::<f64>() + 1e-3)).collect();
        let total: f64 = raw.iter().map(|p| p.1).sum();
        Dist::new(raw.into_iter().map(|(v, m)| (v, m / total))).unwrap()
    }

    #[test]
    fn quantile_coupling_marginals_on_random_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 500 {
            let base = random_dist(&mut rng, 1 + checked % 5).strip_upper_interval();
            if base.mass_at_one() > 0.5 {
                continue;
            }
            let cp = quantile_coupling(&base).unwrap();
            let rebuilt = Coupling::new(cp.cells().to_vec()).unwrap();
            assert_eq!(rebuilt.marginal().len(), base.len());
            assert_abs_diff_eq!(cp.off_diagonal_mass(), 2.0 * base.mass_at_one(), epsilon = 1e-12);
            assert_eq!(cp.mass_at(1.0, 1.0), 0.0);
            assert_abs_diff_eq!(cp.total_mass(), 1.0, epsilon = 1e-12);
            checked += 1;
        }
    }

    proptest! {
        #[test]
        fn strip_is_idempotent_and_mean_preserving(
            raw in prop::collection::vec((0.0f64..=1.0, 0.01f64..1.0), 1..6)
        ) {
            let total: f64 = raw.iter().map(|p| p.1).sum();
            let d = Dist::new(raw.into_iter().map(|(v, m)| (v, m / total))).unwrap();
            let once = d.strip_upper_interval();
            prop_assert!(!once.has_atom_in_upper_interval());
            prop_assert!((once.expectation() - d.expectation()).abs() <= 1e-12);
            prop_assert!((once.total_mass() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(once.strip_upper_interval(), once);
        }

        #[test]
        fn reduction_preserves_mean(
            raw in prop::collection::vec((0.0f64..=1.0, 0.01f64..1.0), 0..5),
            y in 0.501f64..0.999,
            my in 0.01f64..1.0,
        ) {
            let mut pairs = raw;
            pairs.push((y, my));
            let total: f64 = pairs.iter().map(|p| p.1).sum();
            let d = Dist::new(pairs.into_iter().map(|(v, m)| (v, m / total))).unwrap();
            let yv = d.atoms().iter().map(|a| a.value).find(|v| (v - y).abs() < 1e-12).unwrap();
            let r = d.reduce_upper_atom(yv).unwrap();
            prop_assert!((r.expectation() - d.expectation()).abs() <= 1e-13);
            prop_assert!((r.total_mass() - 1.0).abs() <= 1e-13);
        }
    }
}
