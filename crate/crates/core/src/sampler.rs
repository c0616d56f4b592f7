//! Coupled element-wise sampling of two uniform members `A`, `C` of a family.
//!
//! Coordinates are drawn in order `1..=n`. With `p` and `r` the conditional
//! probabilities that the next element lies in `A` and in `C` given their
//! prefixes, one uniform `x` decides both bits:
//!
//! * if `max(p, r) > 1/2`: `A_i = [x < p]`, `C_i = [x < r]`;
//! * otherwise: `A_i = [x < p]`, `C_i = [1/2 - r < x < 1/2]`.
//!
//! Each marginal is then uniform over the family, and the union bit is set
//! with probability `max(p, r, min(p + r, 1/2))`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{h, shannon_entropy, FiniteLaw, Prob};
use crate::error::{Error, Result};
use crate::family::{frequencies, SetFamily};
use crate::functional::MixParams;

pub const MAX_EXACT_FAMILY: usize = 4096;
pub const MAX_EXACT_N: u32 = 16;
/// Samples per RNG stream in [`monte_carlo`].
pub const MC_CHUNK: u64 = 1 << 16;
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng::seed_from_u64(seed); stream k covers samples [k*65536, (k+1)*65536); one gen::<f64>() per coordinate";

fn prefix_mask(i: u32) -> u32 {
    (1u32 << i) - 1
}

/// `Pr[i ∈ S | S_{<i} = prefix]` for `S` uniform on `f`. Elements are
/// 1-indexed; bits of `prefix` at or above `i - 1` are ignored.
pub fn conditional_prob(f: &SetFamily, prefix: u32, i: u32) -> Result<Prob> {
    if i == 0 || i > f.n() {
        return Err(Error::Precondition(format!("element {i} outside [{}]", f.n())));
    }
    let low = prefix_mask(i - 1);
    let (mut count, mut with) = (0usize, 0usize);
    for &s in f.sets() {
        if s & low == prefix & low {
            count += 1;
            with += (s >> (i - 1) & 1) as usize;
        }
    }
    if count == 0 {
        return Err(Error::Precondition(format!("no set agrees with prefix {prefix:#b} below {i}")));
    }
    Prob::new(with as f64 / count as f64)
}

/// `max(p, r, min(p + r, 1/2))`, split into its two branches.
pub fn coupled_union_prob(p: Prob, r: Prob) -> Prob {
    let (p, r) = (p.value(), r.value());
    let hi = p.max(r);
    let v = if hi > 0.5 { hi } else { (p + r).min(0.5) };
    Prob::new(v).expect("union probability lies in [0, 1]")
}

/// Joint probabilities of `(A_i, C_i)` for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cells {
    pub both: f64,
    pub a_only: f64,
    pub c_only: f64,
    pub neither: f64,
}

impl Cells {
    pub fn new(p: f64, r: f64) -> Self {
        let both = if p.max(r) > 0.5 {
            p.min(r)
        } else {
            (p + r - 0.5).max(0.0)
        };
        let a_only = p - both;
        let c_only = r - both;
        Cells {
            both,
            a_only,
            c_only,
            neither: 1.0 - both - a_only - c_only,
        }
    }

    pub fn union(&self) -> f64 {
        self.both + self.a_only + self.c_only
    }

    pub fn total(&self) -> f64 {
        self.both + self.a_only + self.c_only + self.neither
    }

    pub fn min(&self) -> f64 {
        self.both.min(self.a_only).min(self.c_only).min(self.neither)
    }

    fn get(&self, a: bool, c: bool) -> f64 {
        match (a, c) {
            (true, true) => self.both,
            (true, false) => self.a_only,
            (false, true) => self.c_only,
            (false, false) => self.neither,
        }
    }
}

/// For each coordinate, the consistent-set counts keyed by prefix.
#[derive(Debug, Clone)]
struct PrefixTables {
    n: u32,
    size: usize,
    /// `levels[i][prefix] = (consistent sets, of which contain element i+1)`.
    levels: Vec<HashMap<u32, (u32, u32)>>,
}

impl PrefixTables {
    fn new(f: &SetFamily) -> Self {
        let levels = (0..f.n())
            .map(|i| {
                let low = prefix_mask(i);
                let mut table: HashMap<u32, (u32, u32)> = HashMap::new();
                for &s in f.sets() {
                    let e = table.entry(s & low).or_default();
                    e.0 += 1;
                    e.1 += s >> i & 1;
                }
                table
            })
            .collect();
        PrefixTables {
            n: f.n(),
            size: f.len(),
            levels,
        }
    }

    fn prob(&self, level: u32, prefix: u32) -> f64 {
        let (count, with) = self.levels[level as usize][&prefix];
        with as f64 / count as f64
    }

    /// Prefixes at `level` with their probability under the uniform law, in
    /// ascending prefix order.
    fn prefix_law(&self, level: u32) -> Vec<(u32, f64, f64)> {
        let mut rows: Vec<(u32, f64, f64)> = self.levels[level as usize]
            .iter()
            .map(|(&pre, &(count, with))| (pre, count as f64 / self.size as f64, with as f64 / count as f64))
            .collect();
        rows.sort_by_key(|r| r.0);
        rows
    }
}

/// Reusable sampler for one family.
#[derive(Debug, Clone)]
pub struct CoupledSampler {
    tables: PrefixTables,
}

impl CoupledSampler {
    pub fn new(f: &SetFamily) -> Self {
        CoupledSampler {
            tables: PrefixTables::new(f),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (u32, u32) {
        let (mut a, mut c) = (0u32, 0u32);
        for i in 0..self.tables.n {
            let x: f64 = rng.gen();
            let p = self.tables.prob(i, a);
            let r = self.tables.prob(i, c);
            let (ai, ci) = if p.max(r) > 0.5 {
                (x < p, x < r)
            } else {
                (x < p, 0.5 - r < x && x < 0.5)
            };
            a |= (ai as u32) << i;
            c |= (ci as u32) << i;
        }
        (a, c)
    }
}

/// One coupled draw `(A, C)` from a fresh generator seeded with `seed`.
pub fn sample_pair(f: &SetFamily, seed: u64) -> (u32, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoupledSampler::new(f).sample(&mut rng)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub samples: u64,
    pub seed: u64,
    pub rng: &'static str,
    /// Occurrences of each `(A, C)` pair, keyed by masks.
    #[serde(serialize_with = "serialize_pair_map")]
    pub counts: BTreeMap<(u32, u32), u64>,
}

impl MonteCarloReport {
    pub fn marginal_a(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for (&(a, _), &k) in &self.counts {
            *out.entry(a).or_default() += k;
        }
        out
    }

    pub fn marginal_c(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for (&(_, c), &k) in &self.counts {
            *out.entry(c).or_default() += k;
        }
        out
    }
}

/// Draws `samples` coupled pairs. Sample `j` comes from stream
/// `j / MC_CHUNK` of the generator, so results do not depend on threading.
pub fn monte_carlo(f: &SetFamily, samples: u64, seed: u64) -> MonteCarloReport {
    let sampler = CoupledSampler::new(f);
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<BTreeMap<(u32, u32), u64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut counts = BTreeMap::new();
            for _ in 0..len {
                *counts.entry(sampler.sample(&mut rng)).or_default() += 1;
            }
            counts
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in partial {
        for (key, k) in part {
            *counts.entry(key).or_default() += k;
        }
    }
    MonteCarloReport {
        samples,
        seed,
        rng: RNG_ALGORITHM,
        counts,
    }
}

/// Largest `|count/N - p| / sqrt(p(1-p)/N)` over all outcomes, with any
/// sampled outcome of exact mass zero reported as infinite.
pub fn monte_carlo_max_z(f: &SetFamily, samples: u64, seed: u64) -> Result<f64> {
    let exact = exact_joint_law(f)?;
    let mc = monte_carlo(f, samples, seed);
    let n = samples as f64;
    let mut worst: f64 = 0.0;
    for key in mc.counts.keys() {
        if !exact.outcomes.contains_key(key) {
            return Ok(f64::INFINITY);
        }
    }
    for (key, &p) in &exact.outcomes {
        let observed = mc.counts.get(key).copied().unwrap_or(0) as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        if se > 0.0 {
            worst = worst.max((observed - p).abs() / se);
        }
    }
    Ok(worst)
}

/// Law of the pair `(A, C)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointLaw {
    #[serde(serialize_with = "serialize_pair_map")]
    pub outcomes: BTreeMap<(u32, u32), f64>,
}

impl JointLaw {
    pub fn total_mass(&self) -> f64 {
        self.outcomes.values().sum()
    }

    pub fn mass(&self, a: u32, c: u32) -> f64 {
        self.outcomes.get(&(a, c)).copied().unwrap_or(0.0)
    }

    pub fn marginal_a(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (&(a, _), &m) in &self.outcomes {
            *out.entry(a).or_default() += m;
        }
        out
    }

    pub fn marginal_c(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (&(_, c), &m) in &self.outcomes {
            *out.entry(c).or_default() += m;
        }
        out
    }

    /// Largest deviation of either marginal from the uniform law on `f`,
    /// including mass placed outside `f`.
    pub fn max_uniform_deviation(&self, f: &SetFamily) -> f64 {
        let target = 1.0 / f.len() as f64;
        let dev = |marg: BTreeMap<u32, f64>| {
            let inside = f
                .sets()
                .iter()
                .map(|s| (marg.get(s).copied().unwrap_or(0.0) - target).abs())
                .fold(0.0, f64::max);
            let outside = marg
                .iter()
                .filter(|(s, _)| !f.contains(**s))
                .map(|(_, m)| m.abs())
                .fold(0.0, f64::max);
            inside.max(outside)
        };
        dev(self.marginal_a()).max(dev(self.marginal_c()))
    }

    pub fn union_law(&self) -> Result<FiniteLaw<u32>> {
        FiniteLaw::from_accumulated(self.outcomes.iter().map(|(&(a, c), &m)| (a | c, m)))
    }
}

fn serialize_pair_map<S, V>(map: &BTreeMap<(u32, u32), V>, s: S) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
    V: Serialize,
{
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Entry<'a, V> {
        a: u32,
        c: u32,
        value: &'a V,
    }
    let mut seq = s.serialize_seq(Some(map.len()))?;
    for (&(a, c), v) in map {
        seq.serialize_element(&Entry { a, c, value: v })?;
    }
    seq.end()
}

/// One reachable pair of prefixes at a coordinate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrefixPairRecord {
    pub prefix_a: u32,
    pub prefix_c: u32,
    pub weight: f64,
    pub p: f64,
    pub r: f64,
    pub cells: Cells,
}

/// Forward recursion of the coupled scheme: per-coordinate records and the
/// resulting joint law.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub levels: Vec<Vec<PrefixPairRecord>>,
    pub law: JointLaw,
}

fn guard(f: &SetFamily) -> Result<()> {
    if f.len() > MAX_EXACT_FAMILY || f.n() > MAX_EXACT_N {
        return Err(Error::Resource(format!(
            "exact law needs |F| <= {MAX_EXACT_FAMILY} and n <= {MAX_EXACT_N}, got |F| = {}, n = {}",
            f.len(),
            f.n()
        )));
    }
    Ok(())
}

/// Propagates the law of `(A_{<i}, C_{<i})` one coordinate at a time. Prefix
/// pairs determine the consistent subsets exactly, so they serve as state.
pub fn exact_coupled_run(f: &SetFamily) -> Result<CoupledRun> {
    guard(f)?;
    let tables = PrefixTables::new(f);
    let mut state: BTreeMap<(u32, u32), f64> = BTreeMap::from([((0, 0), 1.0)]);
    let mut levels = Vec::with_capacity(f.n() as usize);
    for i in 0..f.n() {
        let mut next: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let mut records = Vec::with_capacity(state.len());
        for (&(pa, pc), &w) in &state {
            let p = tables.prob(i, pa);
            let r = tables.prob(i, pc);
            let cells = Cells::new(p, r);
            records.push(PrefixPairRecord {
                prefix_a: pa,
                prefix_c: pc,
                weight: w,
                p,
                r,
                cells,
            });
            for (a, c) in [(true, true), (true, false), (false, true), (false, false)] {
                let m = cells.get(a, c);
                if m > 0.0 {
                    let key = (pa | (a as u32) << i, pc | (c as u32) << i);
                    *next.entry(key).or_default() += w * m;
                }
            }
        }
        levels.push(records);
        state = next;
    }
    Ok(CoupledRun {
        levels,
        law: JointLaw { outcomes: state },
    })
}

pub fn exact_joint_law(f: &SetFamily) -> Result<JointLaw> {
    Ok(exact_coupled_run(f)?.law)
}

/// Worst-case discrepancies of the coupled recursion against its defining
/// properties.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CouplingAudit {
    pub reachable_pairs: usize,
    pub max_marginal_deviation: f64,
    pub max_union_formula_error: f64,
    pub max_cell_sum_error: f64,
    pub min_cell: f64,
    pub total_mass_error: f64,
}

pub fn audit_coupling(f: &SetFamily) -> Result<CouplingAudit> {
    let run = exact_coupled_run(f)?;
    let mut audit = CouplingAudit {
        reachable_pairs: 0,
        max_marginal_deviation: run.law.max_uniform_deviation(f),
        max_union_formula_error: 0.0,
        max_cell_sum_error: 0.0,
        min_cell: f64::INFINITY,
        total_mass_error: (run.law.total_mass() - 1.0).abs(),
    };
    for rec in run.levels.iter().flatten() {
        audit.reachable_pairs += 1;
        let formula = coupled_union_prob(Prob::new(rec.p)?, Prob::new(rec.r)?).value();
        audit.max_union_formula_error = audit.max_union_formula_error.max((rec.cells.union() - formula).abs());
        audit.max_cell_sum_error = audit.max_cell_sum_error.max((rec.cells.total() - 1.0).abs());
        audit.min_cell = audit.min_cell.min(rec.cells.min());
    }
    Ok(audit)
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyComparison {
    pub family_size: usize,
    /// `log₂ |F|`.
    pub h_a: f64,
    /// `H(A)` recomputed from the marginal of the exact joint law.
    pub h_a_from_law: f64,
    /// `Σ_i H(A_i | A_{<i})`.
    pub chain_rule_sum: f64,
    pub h_union_independent: f64,
    pub h_union_coupled: f64,
    pub alpha: f64,
    /// `(1-α) H(A∪B) + α H(A∪C)`.
    pub combination: f64,
    pub exceeds_h_a: bool,
    pub max_frequency_ratio: f64,
}

/// Chain-rule terms `H(A_i | A_{<i})`, one per coordinate.
pub fn conditional_entropies(f: &SetFamily) -> Vec<f64> {
    let tables = PrefixTables::new(f);
    (0..f.n())
        .map(|i| tables.prefix_law(i).iter().map(|&(_, w, p)| w * h(p)).sum())
        .collect()
}

pub fn entropy_comparison(f: &SetFamily, params: &MixParams) -> Result<EntropyComparison> {
    let law = exact_joint_law(f)?;
    let size = f.len() as f64;
    let marginal = FiniteLaw::from_accumulated(law.marginal_a())?;
    let pair = 1.0 / (size * size);
    let independent = FiniteLaw::from_accumulated(
        f.sets()
            .iter()
            .flat_map(|&a| f.sets().iter().map(move |&b| (a | b, pair))),
    )?;
    let h_union_independent = shannon_entropy(&independent);
    let h_union_coupled = shannon_entropy(&law.union_law()?);
    let h_a = size.log2();
    let combination = (1.0 - params.alpha) * h_union_independent + params.alpha * h_union_coupled;
    Ok(EntropyComparison {
        family_size: f.len(),
        h_a,
        h_a_from_law: shannon_entropy(&marginal),
        chain_rule_sum: conditional_entropies(f).iter().sum(),
        h_union_independent,
        h_union_coupled,
        alpha: params.alpha,
        combination,
        exceeds_h_a: combination > h_a,
        max_frequency_ratio: frequencies(f).max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateStatus {
    Holds,
    Violated,
    HypothesisNotMet,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateMargin {
    /// 1-indexed element.
    pub element: u32,
    /// `E[p_i] = E[q_i] = E[r_i]`, the frequency of the element.
    pub expectation: f64,
    /// `H((A∪B)_i | A_{<i}, B_{<i})`
    pub independent: f64,
    /// `H((A∪C)_i | A_{<i}, C_{<i})`
    pub coupled: f64,
    /// `H(A_i | A_{<i})`
    pub own: f64,
    pub margin: f64,
    pub status: CoordinateStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerElementReport {
    pub alpha: f64,
    pub c: f64,
    pub coordinates: Vec<CoordinateMargin>,
}

impl PerElementReport {
    pub fn violations(&self) -> usize {
        self.coordinates
            .iter()
            .filter(|c| c.status == CoordinateStatus::Violated)
            .count()
    }

    pub fn holds(&self) -> bool {
        self.violations() == 0
    }
}

/// Margin tolerated before a coordinate counts as violated.
pub const MARGIN_TOL: f64 = 1e-12;

/// Per-coordinate form of the entropy inequality. Coordinates whose element
/// frequency exceeds `c` fall outside the hypothesis and are only reported.
pub fn per_element_inequality_check(f: &SetFamily, params: &MixParams) -> Result<PerElementReport> {
    let run = exact_coupled_run(f)?;
    let tables = PrefixTables::new(f);
    let freq = frequencies(f);
    let mut coordinates = Vec::with_capacity(f.n() as usize);
    for i in 0..f.n() {
        let prefixes = tables.prefix_law(i);
        let own: f64 = prefixes.iter().map(|&(_, w, p)| w * h(p)).sum();
        let mut independent = 0.0;
        for &(_, wa, p) in &prefixes {
            for &(_, wb, q) in &prefixes {
                independent += wa * wb * h(p + q - p * q);
            }
        }
        let coupled: f64 = run.levels[i as usize]
            .iter()
            .map(|rec| rec.weight * h(rec.cells.union()))
            .sum();
        let margin = (1.0 - params.alpha) * independent + params.alpha * coupled - own;
        let expectation = freq.ratio(i + 1);
        let status = if expectation > params.c {
            CoordinateStatus::HypothesisNotMet
        } else if margin >= -MARGIN_TOL {
            CoordinateStatus::Holds
        } else {
            CoordinateStatus::Violated
        };
        coordinates.push(CoordinateMargin {
            element: i + 1,
            expectation,
            independent,
            coupled,
            own,
            margin,
            status,
        });
    }
    Ok(PerElementReport {
        alpha: params.alpha,
        c: params.c,
        coordinates,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::family::union_product;

    fn fam(n: u32, sets: &[&[u32]]) -> SetFamily {
        let lists: Vec<Vec<u32>> = sets.iter().map(|s| s.to_vec()).collect();
        SetFamily::from_element_lists(n, &lists).unwrap()
    }

    fn pr(x: f64) -> Prob {
        Prob::new(x).unwrap()
    }

    #[test]
    fn conditional_prob_examples() {
        let p2 = SetFamily::power_set(2).unwrap();
        assert_eq!(conditional_prob(&p2, 0, 1).unwrap().value(), 0.5);
        let f = fam(2, &[&[1], &[2], &[1, 2]]);
        assert_abs_diff_eq!(conditional_prob(&f, 0, 1).unwrap().value(), 2.0 / 3.0, epsilon = 1e-15);
        // Given 1 ∉ A the only consistent set is {2}.
        assert_eq!(conditional_prob(&f, 0, 2).unwrap().value(), 1.0);
        let g = fam(2, &[&[1]]);
        assert!(conditional_prob(&g, 0, 2).is_err());
        assert!(conditional_prob(&g, 0, 3).is_err());
    }

    #[test]
    fn union_prob_examples() {
        assert_eq!(coupled_union_prob(pr(0.7), pr(0.2)).value(), 0.7);
        assert_abs_diff_eq!(coupled_union_prob(pr(0.2), pr(0.2)).value(), 0.4, epsilon = 1e-15);
        assert_eq!(coupled_union_prob(pr(0.3), pr(0.4)).value(), 0.5);
        for &(p, r) in &[(0.1, 0.6), (0.5, 0.5), (0.0, 0.0), (1.0, 0.3), (0.45, 0.02)] {
            let v = coupled_union_prob(pr(p), pr(r)).value();
            let formula = p.max(r).max((p + r).min(0.5));
            assert_eq!(v, formula);
            assert_abs_diff_eq!(Cells::new(p, r).union(), formula, epsilon = 1e-15);
        }
        let c = Cells::new(0.3, 0.4);
        assert_abs_diff_eq!(c.both, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(c.neither, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn single_set_family() {
        let f = fam(3, &[&[1, 3]]);
        for seed in 0..20 {
            assert_eq!(sample_pair(&f, seed), (0b101, 0b101));
        }
        let law = exact_joint_law(&f).unwrap();
        assert_eq!(law.outcomes.len(), 1);
        assert_eq!(law.mass(0b101, 0b101), 1.0);
    }

    #[test]
    fn samples_stay_in_family() {
        let f = fam(3, &[&[1], &[2], &[1, 2], &[3], &[2, 3]]);
        let closure = union_product(&f);
        for seed in 0..500 {
            let (a, c) = sample_pair(&f, seed);
            assert!(f.contains(a) && f.contains(c));
            assert!(closure.contains(a | c));
        }
        assert_eq!(sample_pair(&f, 7), sample_pair(&f, 7));
    }

    #[test]
    fn exact_law_by_hand() {
        // F = {{1}, {2}}: p_1 = r_1 = 1/2, so the windows [0, 1/2) and
        // (0, 1/2) coincide and A = C almost surely.
        let f = fam(2, &[&[1], &[2]]);
        let law = exact_joint_law(&f).unwrap();
        assert_abs_diff_eq!(law.mass(1, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(law.mass(2, 2), 0.5, epsilon = 1e-15);
        let cmp = entropy_comparison(&f, &MixParams::default()).unwrap();
        assert_abs_diff_eq!(cmp.h_union_coupled, 1.0, epsilon = 1e-12);
        // A ∪ B is {1}, {2} or {1,2} with masses 1/4, 1/4, 1/2.
        assert_abs_diff_eq!(cmp.h_union_independent, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cmp.h_a, 1.0, epsilon = 1e-15);
        assert!(cmp.exceeds_h_a);
    }

    #[test]
    fn exact_marginals_are_uniform() {
        for f in [
            SetFamily::power_set(3).unwrap(),
            fam(3, &[&[1], &[2], &[1, 2], &[3], &[2, 3]]),
            fam(4, &[&[], &[1, 4], &[2], &[1, 2, 4], &[3, 4], &[1, 2, 3, 4]]),
        ] {
            let audit = audit_coupling(&f).unwrap();
            assert!(audit.max_marginal_deviation <= 1e-12, "{audit:?}");
            assert!(audit.max_union_formula_error <= 1e-13, "{audit:?}");
            assert!(audit.max_cell_sum_error <= 1e-14, "{audit:?}");
            assert!(audit.min_cell >= -1e-15, "{audit:?}");
            let cmp = entropy_comparison(&f, &MixParams::default()).unwrap();
            assert_abs_diff_eq!(cmp.chain_rule_sum, cmp.h_a, epsilon = 1e-12);
            assert_abs_diff_eq!(cmp.h_a_from_law, cmp.h_a, epsilon = 1e-12);
        }
    }

    #[test]
    fn union_closed_support_bound() {
        let f = SetFamily::power_set(3).unwrap();
        let cmp = entropy_comparison(&f, &MixParams::default()).unwrap();
        assert!(cmp.h_union_independent <= cmp.h_a + 1e-12);
        assert!(cmp.h_union_coupled <= cmp.h_a + 1e-12);
    }

    #[test]
    fn resource_guard() {
        let big = SetFamily::power_set(13).unwrap();
        assert!(matches!(exact_joint_law(&big), Err(Error::Resource(_))));
        let wide = SetFamily::new(17, [1 << 16]).unwrap();
        assert!(matches!(exact_joint_law(&wide), Err(Error::Resource(_))));
    }

    #[test]
    fn per_element_low_frequency_family() {
        let f = fam(3, &[&[1], &[2], &[3]]);
        let r = per_element_inequality_check(&f, &MixParams::default()).unwrap();
        assert!(r.coordinates.iter().all(|c| c.status == CoordinateStatus::Holds), "{r:?}");
        assert!(r.coordinates[0].margin > 0.0);
        assert_abs_diff_eq!(r.coordinates[0].own, h(1.0 / 3.0), epsilon = 1e-15);
        assert_abs_diff_eq!(r.coordinates[0].independent, h(5.0 / 9.0), epsilon = 1e-15);
        assert_abs_diff_eq!(r.coordinates[0].coupled, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn per_element_gate() {
        let f = SetFamily::power_set(3).unwrap();
        let r = per_element_inequality_check(&f, &MixParams::default()).unwrap();
        assert!(r
            .coordinates
            .iter()
            .all(|c| c.status == CoordinateStatus::HypothesisNotMet));
        assert!(r.holds());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_chunked() {
        let f = fam(2, &[&[1], &[2], &[1, 2]]);
        let a = monte_carlo(&f, 3 * MC_CHUNK / 2, 11);
        let b = monte_carlo(&f, 3 * MC_CHUNK / 2, 11);
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.counts.values().sum::<u64>(), 3 * MC_CHUNK / 2);
        assert_ne!(a.counts, monte_carlo(&f, 3 * MC_CHUNK / 2, 12).counts);
    }
}
