//! Grid certification of the mixed inequality over laws supported on
//! `{a1, a2, 1}`, and the searches for the critical bound `c` and weight `α`
//! built on top of it.
//!
//! The coarse stage scans a regular grid in `(a1, a2, p1, p2)`. Grid points
//! whose expectation exceeds `c` are pulled back onto `E[p] = c` by moving
//! mass from `1` to `a1`. The grid is split into blocks in the `(a1, a2)`
//! plane; the best point of every block seeds a local refinement that shrinks
//! the spacing tenfold per round. Keeping one seed per block matters: the
//! plane contains large zero plateaus (laws on `{0, 1}`) that would otherwise
//! crowd out the two-point basin near the extremal law.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::Dist;
use crate::entropy::h;
use crate::error::{Error, Result};
use crate::functional::MixParams;

/// Certification tolerance for grid minima.
pub const CERT_TOL: f64 = 1e-6;

/// A law `{a1: p1, a2: p2, 1: 1 - p1 - p2}` with `0 ≤ a1 < a2 ≤ 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Support3Point {
    pub a1: f64,
    pub a2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Support3Point {
    pub fn mass_at_one(&self) -> f64 {
        (1.0 - self.p1 - self.p2).max(0.0)
    }

    pub fn expectation(&self) -> f64 {
        self.p1 * self.a1 + self.p2 * self.a2 + self.mass_at_one()
    }

    pub fn to_dist(&self) -> Result<Dist> {
        Dist::new([(self.a1, self.p1), (self.a2, self.p2), (1.0, self.mass_at_one())])
    }

    fn cmp_lex(&self, other: &Self) -> Ordering {
        self.a1
            .total_cmp(&other.a1)
            .then(self.a2.total_cmp(&other.a2))
            .then(self.p1.total_cmp(&other.p1))
            .then(self.p2.total_cmp(&other.p2))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinimizationResult {
    pub min_value: f64,
    pub argmin: Support3Point,
    pub grid_resolution: usize,
    pub refinement_depth: usize,
    pub seeds: usize,
    pub evaluations: u64,
}

/// Tuning knobs of [`minimize_support3_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizerConfig {
    /// Grid intervals per axis; `a` axes span `[0, 1/2]`, mass axes `[0, 1]`.
    pub grid: usize,
    /// Number of tenfold refinement rounds.
    pub refine: usize,
    /// Blocks per `a` axis used to pick refinement seeds.
    pub seed_blocks: usize,
    /// Refinement grid points on each side of the incumbent. With `10` the
    /// window spans one spacing of the previous round.
    pub half_width: usize,
}

impl MinimizerConfig {
    pub fn new(grid: usize, refine: usize) -> Self {
        MinimizerConfig {
            grid,
            refine,
            seed_blocks: 8,
            half_width: 10,
        }
    }
}

/// Configuration used by [`find_critical_c`] and [`find_alpha`].
impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            grid: 40,
            refine: 4,
            seed_blocks: 8,
            half_width: 8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    point: Support3Point,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        match self.value.total_cmp(&other.value) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.point.cmp_lex(&other.point) == Ordering::Less,
        }
    }

    fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.better_than(&x) { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

/// Entropies that only depend on the support values `a1, a2`.
#[derive(Debug, Clone, Copy)]
struct SupportEntropies {
    h11: f64,
    h12: f64,
    h22: f64,
    self1: f64,
    self2: f64,
    diag1: f64,
    diag2: f64,
}

impl SupportEntropies {
    fn new(a1: f64, a2: f64) -> Self {
        SupportEntropies {
            h11: h(2.0 * a1 - a1 * a1),
            h12: h(a1 + a2 - a1 * a2),
            h22: h(2.0 * a2 - a2 * a2),
            self1: h(a1),
            self2: h(a2),
            diag1: h((2.0 * a1).min(0.5)),
            diag2: h((2.0 * a2).min(0.5)),
        }
    }

    #[inline]
    fn total(&self, alpha: f64, p1: f64, p2: f64) -> f64 {
        let a = (1.0 - p1 - p2).max(0.0);
        let q = (1.0 - 2.0 * a).max(0.0);
        let d1 = p1.min(q);
        let d2 = (q - d1).clamp(0.0, p2);
        let indep = p1 * p1 * self.h11 + 2.0 * p1 * p2 * self.h12 + p2 * p2 * self.h22;
        let coupled = d1 * self.diag1 + d2 * self.diag2;
        let own = p1 * self.self1 + p2 * self.self2;
        (1.0 - alpha) * indep + alpha * coupled - own
    }
}

/// Total of the functional at a support-3 point, evaluated through the
/// closed form for three atoms.
pub fn support3_total(point: &Support3Point, alpha: f64) -> f64 {
    SupportEntropies::new(point.a1, point.a2).total(alpha, point.p1, point.p2)
}

/// Moves mass from `1` to `a1` until `E[p] ≤ c`. Returns `None` when even
/// emptying the atom at `1` is not enough.
fn project(a1: f64, a2: f64, p1: f64, p2: f64, c: f64) -> Option<(f64, f64)> {
    if p1 < 0.0 || p2 < 0.0 {
        return None;
    }
    let top = 1.0 - p1 - p2;
    if top < -1e-15 {
        return None;
    }
    let top = top.max(0.0);
    let e = p1 * a1 + p2 * a2 + top;
    if e <= c {
        return Some((p1, p2));
    }
    let shift = (e - c) / (1.0 - a1);
    if shift > top + 1e-15 {
        return None;
    }
    Some(((p1 + shift.min(top)), p2))
}

fn evaluate(ent: &SupportEntropies, a1: f64, a2: f64, p1: f64, p2: f64, params: &MixParams) -> Option<Candidate> {
    let (p1, p2) = project(a1, a2, p1, p2, params.c)?;
    Some(Candidate {
        value: ent.total(params.alpha, p1, p2),
        point: Support3Point { a1, a2, p1, p2 },
    })
}

fn coarse_stage(params: &MixParams, cfg: &MinimizerConfig) -> (Vec<Candidate>, u64) {
    let n = cfg.grid;
    let blocks = cfg.seed_blocks.max(1);
    let block_of = |idx: usize| idx * blocks / (n + 1);
    let a_step = 0.5 / n as f64;
    let p_step = 1.0 / n as f64;

    let rows: Vec<(Vec<Option<Candidate>>, u64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = vec![None; blocks * blocks];
            let mut evals = 0u64;
            let a1 = i as f64 * a_step;
            for k in (i + 1)..=n {
                let a2 = k as f64 * a_step;
                let ent = SupportEntropies::new(a1, a2);
                let slot = block_of(i) * blocks + block_of(k);
                for j in 0..=n {
                    let p1 = j as f64 * p_step;
                    for l in 0..=(n - j) {
                        let p2 = l as f64 * p_step;
                        evals += 1;
                        if let Some(c) = evaluate(&ent, a1, a2, p1, p2, params) {
                            best[slot] = Candidate::pick(best[slot], Some(c));
                        }
                    }
                }
            }
            (best, evals)
        })
        .collect();

    let mut merged = vec![None; blocks * blocks];
    let mut evals = 0;
    for (row, e) in rows {
        evals += e;
        for (slot, cand) in merged.iter_mut().zip(row) {
            *slot = Candidate::pick(*slot, cand);
        }
    }
    let mut seeds: Vec<Candidate> = merged.into_iter().flatten().collect();
    seeds.sort_by(|x, y| {
        x.value
            .total_cmp(&y.value)
            .then(x.point.cmp_lex(&y.point))
    });
    (seeds, evals)
}

fn refine_seed(seed: Candidate, params: &MixParams, cfg: &MinimizerConfig) -> (Candidate, u64) {
    let m = cfg.half_width as i64;
    let mut best = seed;
    let mut evals = 0u64;
    let mut a_step = 0.5 / cfg.grid as f64;
    let mut p_step = 1.0 / cfg.grid as f64;
    for _ in 0..cfg.refine {
        a_step /= 10.0;
        p_step /= 10.0;
        let center = best.point;
        for di in -m..=m {
            let a1 = center.a1 + di as f64 * a_step;
            if !(0.0..=0.5).contains(&a1) {
                continue;
            }
            for dk in -m..=m {
                let a2 = center.a2 + dk as f64 * a_step;
                if a2 <= a1 || a2 > 0.5 {
                    continue;
                }
                let ent = SupportEntropies::new(a1, a2);
                for dj in -m..=m {
                    let p1 = center.p1 + dj as f64 * p_step;
                    if p1 < 0.0 {
                        continue;
                    }
                    for dl in -m..=m {
                        let p2 = center.p2 + dl as f64 * p_step;
                        evals += 1;
                        if let Some(c) = evaluate(&ent, a1, a2, p1, p2, params) {
                            if c.better_than(&best) {
                                best = c;
                            }
                        }
                    }
                }
            }
        }
    }
    (best, evals)
}

/// Minimises the functional over support-3 laws with `E[p] ≤ c`.
pub fn minimize_support3(params: &MixParams, grid: usize, refine: usize) -> Result<MinimizationResult> {
    minimize_support3_with(params, &MinimizerConfig::new(grid, refine))
}

pub fn minimize_support3_with(params: &MixParams, cfg: &MinimizerConfig) -> Result<MinimizationResult> {
    if cfg.grid < 2 {
        return Err(Error::Precondition("grid must be at least 2".into()));
    }
    let (seeds, coarse_evals) = coarse_stage(params, cfg);
    let refined: Vec<(Candidate, u64)> = seeds
        .par_iter()
        .map(|s| refine_seed(*s, params, cfg))
        .collect();
    let mut evaluations = coarse_evals;
    let mut best: Option<Candidate> = None;
    for (cand, e) in refined {
        evaluations += e;
        best = Candidate::pick(best, Some(cand));
    }
    let best = best.ok_or_else(|| Error::Precondition("no feasible grid point".into()))?;
    Ok(MinimizationResult {
        min_value: best.value,
        argmin: best.point,
        grid_resolution: cfg.grid,
        refinement_depth: cfg.refine,
        seeds: seeds.len(),
        evaluations,
    })
}

/// Search settings for [`find_critical_c_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalSearch {
    pub lo: f64,
    pub hi: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub c_resolution: f64,
    pub minimizer: MinimizerConfig,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch {
            lo: 0.3,
            hi: 0.45,
            c_resolution: 1e-9,
            minimizer: MinimizerConfig::default(),
        }
    }
}

/// Largest `c` in `(0.3, 0.45)` whose support-3 minimum stays above `-tol`.
pub fn find_critical_c(alpha: f64, tol: f64) -> Result<f64> {
    find_critical_c_with(alpha, tol, &CriticalSearch::default())
}

pub fn find_critical_c_with(alpha: f64, tol: f64, search: &CriticalSearch) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside [0, 1]")));
    }
    if !(tol >= 1e-7) {
        return Err(Error::Precondition(format!("tol = {tol} below 1e-7")));
    }
    let certified = |c: f64| -> Result<bool> {
        let params = MixParams::new(alpha, c)?;
        Ok(minimize_support3_with(&params, &search.minimizer)?.min_value >= -tol)
    };
    let (mut lo, mut hi) = (search.lo, search.hi);
    if !certified(lo)? || certified(hi)? {
        return Err(Error::Bracket {
            what: format!("critical c at alpha = {alpha}"),
            lo,
            hi,
        });
    }
    while hi - lo > search.c_resolution {
        let mid = 0.5 * (lo + hi);
        if certified(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Golden-section search for the weight maximising the critical bound over
/// `α ∈ [0, 0.2]`. Returns `(α*, c*)`.
pub fn find_alpha(tol: f64) -> Result<(f64, f64)> {
    find_alpha_with(tol, &CriticalSearch::default())
}

pub fn find_alpha_with(tol: f64, search: &CriticalSearch) -> Result<(f64, f64)> {
    if !(tol >= 1e-5) {
        return Err(Error::Precondition(format!("tol = {tol} below 1e-5")));
    }
    let cert_tol = 1e-7;
    let critical = |alpha: f64| find_critical_c_with(alpha, cert_tol, search);
    let (alpha, c) = golden_section_max(critical, 0.0, 0.2, tol)?;
    Ok((alpha, c))
}

/// Maximises a unimodal `f` on `[lo, hi]` to bracket width `tol`.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Which two-dimensional slice a scan row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Two-point laws `{a2, 1}`, infeasible points pulled onto `E[p] = c`
    /// by moving mass from `1` to `a2`.
    AtomicP1Zero,
    /// Laws `{0, a2, 1}` on the boundary `E[p] = c`.
    ZeroOneA1Zero,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub regime: Regime,
    pub point: Support3Point,
    pub expectation: f64,
    pub total: f64,
}

/// Both regime slices on a `resolution × resolution` grid in `(a2, p2)`.
pub fn regime_slices(params: &MixParams, resolution: usize) -> Vec<ScanRow> {
    let n = resolution.max(2);
    let mut rows = Vec::new();
    for k in 1..=n {
        let a2 = 0.5 * k as f64 / n as f64;
        for l in 0..=n {
            let mut p2 = l as f64 / n as f64;
            let top = 1.0 - p2;
            let e = p2 * a2 + top;
            if e > params.c {
                p2 += (e - params.c) / (1.0 - a2);
                if p2 > 1.0 + 1e-15 {
                    continue;
                }
                p2 = p2.min(1.0);
            }
            let point = Support3Point { a1: 0.0, a2, p1: 0.0, p2 };
            rows.push(ScanRow {
                regime: Regime::AtomicP1Zero,
                point,
                expectation: point.expectation(),
                total: support3_total(&point, params.alpha),
            });
        }
    }
    for k in 1..=n {
        let a2 = 0.5 * k as f64 / n as f64;
        for l in 0..=n {
            let p2 = l as f64 / n as f64;
            let top = params.c - p2 * a2;
            let p1 = 1.0 - p2 - top;
            if top < 0.0 || p1 < 0.0 {
                continue;
            }
            let point = Support3Point { a1: 0.0, a2, p1, p2 };
            rows.push(ScanRow {
                regime: Regime::ZeroOneA1Zero,
                point,
                expectation: point.expectation(),
                total: support3_total(&point, params.alpha),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub rows: usize,
    pub resolution: usize,
    pub atomic_min: Option<ScanRow>,
    pub zero_one_min: Option<ScanRow>,
}

pub const DEFAULT_SCAN_RESOLUTION: usize = 200;

/// Writes both regime slices as CSV with columns
/// `a1,a2,p1,p2,expectation,total`; atomic rows come first.
pub fn regime_scan(params: &MixParams, out: &Path) -> Result<ScanSummary> {
    regime_scan_with(params, out, DEFAULT_SCAN_RESOLUTION)
}

pub fn regime_scan_with(params: &MixParams, out: &Path, resolution: usize) -> Result<ScanSummary> {
    let rows = regime_slices(params, resolution);
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(out, e);
    writeln!(w, "a1,a2,p1,p2,expectation,total").map_err(io)?;
    for r in &rows {
        let p = r.point;
        writeln!(w, "{},{},{},{},{},{}", p.a1, p.a2, p.p1, p.p2, r.expectation, r.total).map_err(io)?;
    }
    w.flush().map_err(io)?;
    let min_of = |regime: Regime| {
        rows.iter()
            .filter(|r| r.regime == regime)
            .min_by(|x, y| x.total.total_cmp(&y.total).then(x.point.cmp_lex(&y.point)))
            .copied()
    };
    Ok(ScanSummary {
        rows: rows.len(),
        resolution,
        atomic_min: min_of(Regime::AtomicP1Zero),
        zero_one_min: min_of(Regime::ZeroOneA1Zero),
    })
}

/// Total for a law with at most four atoms, all below or at `1` and none in
/// `(1/2, 1)`. Atoms must be sorted by value; zero masses are allowed.
fn small_law_total(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let mut indep = 0.0;
    for (i, &(v, m)) in atoms.iter().enumerate() {
        indep += m * m * h(2.0 * v - v * v);
        for &(w, n) in &atoms[i + 1..] {
            indep += 2.0 * m * n * h(v + w - v * w);
        }
    }
    let top: f64 = atoms.iter().filter(|a| a.0 >= 1.0).map(|a| a.1).sum();
    let mut diag_left = (1.0 - 2.0 * top).max(0.0);
    let mut coupled = 0.0;
    let mut own = 0.0;
    for &(v, m) in atoms.iter().filter(|a| a.0 < 1.0) {
        let d = m.min(diag_left);
        diag_left -= d;
        coupled += d * h((2.0 * v).min(0.5));
        own += m * h(v);
    }
    (1.0 - alpha) * indep + alpha * coupled - own
}

#[derive(Debug, Clone, Serialize)]
pub struct Support4Report {
    pub grid: usize,
    pub min_value: f64,
    /// `(value, mass)` pairs of the minimiser.
    pub argmin: Vec<(f64, f64)>,
    pub support3_min: f64,
    pub undercut: bool,
    pub negative_found: bool,
}

/// Coarse scan over laws on `{a1, a2, 1/4, 1}` with `E[p] ≤ c`, compared
/// against the support-3 minimum.
pub fn support4_robustness_scan(params: &MixParams, grid: usize) -> Result<Support4Report> {
    if grid < 2 {
        return Err(Error::Precondition("grid must be at least 2".into()));
    }
    let n = grid;
    let a_step = 0.5 / n as f64;
    let m_step = 1.0 / n as f64;
    let quarter = 0.25;
    let scan = (0..n)
        .into_par_iter()
        .map(|i| {
            let a1 = i as f64 * a_step;
            let mut best: Option<(f64, Vec<(f64, f64)>)> = None;
            for k in (i + 1)..=n {
                let a2 = k as f64 * a_step;
                for j in 0..=n {
                    for l in 0..=(n - j) {
                        for t in 0..=(n - j - l) {
                            let (mut p1, p2, p3) = (j as f64 * m_step, l as f64 * m_step, t as f64 * m_step);
                            let mut top = (1.0 - p1 - p2 - p3).max(0.0);
                            let e = p1 * a1 + p2 * a2 + p3 * quarter + top;
                            if e > params.c {
                                let shift = (e - params.c) / (1.0 - a1);
                                if shift > top + 1e-15 {
                                    continue;
                                }
                                p1 += shift.min(top);
                                top = (top - shift).max(0.0);
                            }
                            let mut atoms = [(a1, p1), (a2, p2), (quarter, p3), (1.0, top)];
                            atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
                            let v = small_law_total(&atoms, params.alpha);
                            if best.as_ref().is_none_or(|b| v < b.0) {
                                best = Some((v, atoms.to_vec()));
                            }
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(a), Some(b)) => Some(if b.0 < a.0 || (b.0 == a.0 && lex_atoms(&b.1, &a.1)) { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        );
    let (min_value, argmin) = scan.ok_or_else(|| Error::Precondition("no feasible grid point".into()))?;
    let support3_min = minimize_support3(params, n.max(50), 4)?.min_value;
    Ok(Support4Report {
        grid,
        min_value,
        argmin: argmin.into_iter().filter(|a| a.1 > 0.0).collect(),
        support3_min,
        undercut: min_value < support3_min - CERT_TOL,
        negative_found: min_value < -1e-7,
    })
}

fn lex_atoms(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    false
}

/// [`small_law_total`] exposed for embedding checks.
pub fn support4_total(a1: f64, a2: f64, p1: f64, p2: f64, p_quarter: f64, alpha: f64) -> f64 {
    let top = (1.0 - p1 - p2 - p_quarter).max(0.0);
    let mut atoms = [(a1, p1), (a2, p2), (0.25, p_quarter), (1.0, top)];
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    small_law_total(&atoms, alpha)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::constants::{reference, solve_psi, DEFAULT_ALPHA, DEFAULT_C};
    use crate::functional::mixed_functional;

    /// Dense scan over two-point laws `{b: 1-m, 1: m}` on `E[p] = c` and over
    /// point masses `{b: 1}` with `b ≤ c`. Shares no code with the grid search.
    fn two_point_oracle(alpha: f64, c: f64, steps: usize) -> f64 {
        let hh = |x: f64| {
            if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
            }
        };
        let mut best = f64::INFINITY;
        for k in 0..=steps {
            let b = c * k as f64 / steps as f64;
            let m = (c - b) / (1.0 - b);
            let q = 1.0 - m;
            let value = (1.0 - alpha) * q * q * hh(2.0 * b - b * b)
                + alpha * (1.0 - 2.0 * m).min(q).max(0.0) * hh((2.0 * b).min(0.5))
                - q * hh(b);
            best = best.min(value);
        }
        best
    }

    fn params(alpha: f64, c: f64) -> MixParams {
        MixParams::new(alpha, c).unwrap()
    }

    proptest! {
        #[test]
        fn fast_total_matches_general_functional(
            a1 in 0.0..0.25f64,
            gap in 1e-3..0.25f64,
            p1 in 0.0..1.0f64,
            frac in 0.0..1.0f64,
            alpha in 0.0..1.0f64,
        ) {
            let point = Support3Point { a1, a2: a1 + gap, p1, p2: (1.0 - p1) * frac };
            prop_assume!(point.expectation() < 0.5);
            let d = point.to_dist().unwrap();
            let full = mixed_functional(&d, &params(alpha, 0.49)).unwrap().total;
            prop_assert!((support3_total(&point, alpha) - full).abs() <= 1e-12);
        }

        #[test]
        fn projection_lands_on_the_constraint(
            a1 in 0.0..0.4f64,
            gap in 1e-3..0.1f64,
            p1 in 0.0..1.0f64,
            frac in 0.0..1.0f64,
            c in 0.3..0.45f64,
        ) {
            let a2 = a1 + gap;
            let p2 = (1.0 - p1) * frac;
            if let Some((q1, q2)) = project(a1, a2, p1, p2, c) {
                let pt = Support3Point { a1, a2, p1: q1, p2: q2 };
                prop_assert!(pt.expectation() <= c + 1e-12);
                prop_assert!(pt.mass_at_one() >= 0.0);
                prop_assert_eq!(q2, p2);
            }
        }
    }

    #[test]
    fn certified_at_default_constants() {
        let r = minimize_support3(&params(DEFAULT_ALPHA, DEFAULT_C), 40, 4).unwrap();
        assert!(r.min_value >= -CERT_TOL, "{r:?}");
        assert!(r.argmin.expectation() <= DEFAULT_C + 1e-12);
        assert!(r.argmin.a1 < r.argmin.a2);
    }

    #[test]
    fn negative_beyond_critical_bound() {
        let r = minimize_support3(&params(DEFAULT_ALPHA, 0.383), 40, 4).unwrap();
        assert!(r.min_value < -1e-7, "{r:?}");
        // The minimiser is a two-point law near the extremal one.
        let atomic = if r.argmin.p2 == 0.0 { r.argmin.a1 } else { r.argmin.a2 };
        assert!((atomic - reference::B2).abs() < 0.02, "{r:?}");
        assert!(r.argmin.mass_at_one() > 0.05);
    }

    #[test]
    fn alpha_zero_below_psi_agrees_with_oracle() {
        let c = solve_psi() - 1e-4;
        let r = minimize_support3(&params(0.0, c), 40, 4).unwrap();
        let oracle = two_point_oracle(0.0, c, 200_000);
        assert!(r.min_value >= -1e-7, "{r:?}");
        assert!(oracle >= -1e-12, "{oracle}");
        // Above ψ both see the same negative two-point law.
        let c = solve_psi() + 1e-3;
        let r = minimize_support3(&params(0.0, c), 40, 4).unwrap();
        let oracle = two_point_oracle(0.0, c, 200_000);
        assert!(oracle < 0.0);
        assert!(r.min_value <= oracle + 1e-8, "{} vs {oracle}", r.min_value);
    }

    #[test]
    fn grid_minimum_never_beats_the_oracle_on_two_point_laws() {
        let c = 0.385;
        let r = minimize_support3(&params(DEFAULT_ALPHA, c), 30, 4).unwrap();
        let oracle = two_point_oracle(DEFAULT_ALPHA, c, 400_000);
        assert!((r.min_value - oracle).abs() <= 1e-8, "{} vs {oracle}", r.min_value);
    }

    #[test]
    fn deterministic() {
        let p = params(DEFAULT_ALPHA, 0.383);
        let a = minimize_support3(&p, 20, 2).unwrap();
        let b = minimize_support3(&p, 20, 2).unwrap();
        assert_eq!(a.min_value.to_bits(), b.min_value.to_bits());
        assert_eq!(a.argmin, b.argmin);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn refinement_never_worsens() {
        let p = params(DEFAULT_ALPHA, 0.384);
        let coarse = minimize_support3(&p, 20, 0).unwrap();
        let fine = minimize_support3(&p, 20, 3).unwrap();
        assert!(fine.min_value <= coarse.min_value);
    }

    #[test]
    fn rejects_tiny_grid_and_bad_inputs() {
        assert!(minimize_support3(&params(0.1, 0.3), 1, 0).is_err());
        assert!(matches!(find_critical_c(1.5, 1e-7), Err(Error::Precondition(_))));
        assert!(matches!(find_critical_c(0.1, 1e-9), Err(Error::Precondition(_))));
        assert!(matches!(find_alpha(1e-7), Err(Error::Precondition(_))));
    }

    #[test]
    fn full_weight_has_no_bracket() {
        let search = CriticalSearch {
            minimizer: MinimizerConfig::new(20, 2),
            ..CriticalSearch::default()
        };
        let err = find_critical_c_with(1.0, 1e-7, &search).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }), "{err}");
    }

    #[test]
    fn critical_bound_at_alpha_zero_is_psi() {
        let search = CriticalSearch {
            c_resolution: 1e-7,
            ..CriticalSearch::default()
        };
        let c = find_critical_c_with(0.0, 1e-7, &search).unwrap();
        assert!((c - solve_psi()).abs() < 5e-6, "{c}");
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 0.07) * (x - 0.07) + 1.0), 0.0, 0.2, 1e-8).unwrap();
        assert!((x - 0.07).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_scan_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let p = params(DEFAULT_ALPHA, DEFAULT_C);
        let summary = regime_scan_with(&p, &path, 100).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a1,a2,p1,p2,expectation,total"));
        assert_eq!(lines.count(), summary.rows);
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 6);
        }
        let atomic = summary.atomic_min.unwrap();
        // Within two grid cells of the extremal law.
        assert!((atomic.point.a2 - reference::B2).abs() <= 2.0 * 0.5 / 100.0, "{atomic:?}");
        assert!((atomic.point.mass_at_one() - reference::A).abs() <= 2.0 / 100.0, "{atomic:?}");
        assert!(atomic.total.abs() < 1e-4);
        let zero_one = summary.zero_one_min.unwrap();
        assert!(zero_one.total >= -1e-12);
        assert!((zero_one.expectation - DEFAULT_C).abs() <= 1e-12);
    }

    #[test]
    fn regime_scan_reports_unwritable_path() {
        let p = params(DEFAULT_ALPHA, DEFAULT_C);
        let err = regime_scan_with(&p, Path::new("/nonexistent/dir/scan.csv"), 10).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn support4_embeds_support3() {
        for &(a1, a2, p1, p2) in &[(0.1, 0.3, 0.4, 0.5), (0.0, 0.33, 0.1, 0.82), (0.2, 0.25, 0.3, 0.3)] {
            let pt = Support3Point { a1, a2, p1, p2 };
            for alpha in [0.0, DEFAULT_ALPHA, 0.5] {
                let four = support4_total(a1, a2, p1, p2, 0.0, alpha);
                assert!((four - support3_total(&pt, alpha)).abs() <= 1e-12);
            }
        }
        // An atom of the support coinciding with 1/4 splits its mass freely.
        let d = Dist::new([(0.1, 0.3), (0.25, 0.6), (1.0, 0.1)]).unwrap();
        let full = mixed_functional(&d, &params(0.2, 0.49)).unwrap().total;
        let split = support4_total(0.1, 0.25, 0.3, 0.2, 0.4, 0.2);
        assert!((full - split).abs() <= 1e-12);
    }

    #[test]
    fn support4_scan_finds_no_undercut() {
        let r = support4_robustness_scan(&params(DEFAULT_ALPHA, DEFAULT_C), 16).unwrap();
        assert!(!r.undercut, "{r:?}");
        assert!(!r.negative_found, "{r:?}");
    }
}
