//! Reproduction checks for every published constant and property, shared by
//! the `repro` subcommand and the examples.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{self, reference, CriticalConstants, DEFAULT_ALPHA, DEFAULT_C};
use crate::dist::{reduction_gain, reduction_gain_curvature, reduction_gain_slope, karamata_claim_check, reduction_direction_check, Cell, Coupling, Dist};
use crate::error::Result;
use crate::family::{conjecture_check, enumerate_union_closed, enumerate_union_closed_naive, SetFamily};
use crate::functional::{
    central_first, central_second, f_mu_derivative_check, f_mu_third_order_closed_form, h2q_curvature_fd,
    h2q_third_order_fd, mixed_functional, single_term_counterexample, term_coupled, MixParams, FD_STEP,
};
use crate::optimizer::{find_alpha, find_critical_c, minimize_support3};
use crate::sampler::{audit_coupling, conditional_entropies, monte_carlo_max_z};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReproConfig {
    pub seed: u64,
    /// Randomised trials per property suite.
    pub trials: usize,
    pub mc_samples: u64,
    pub mc_families: usize,
    pub random_families: usize,
    pub certification_grid: usize,
    pub certification_refine: usize,
}

impl Default for ReproConfig {
    fn default() -> Self {
        ReproConfig {
            seed: 2022,
            trials: 10_000,
            mc_samples: 100_000,
            mc_families: 10,
            random_families: 50,
            certification_grid: 100,
            certification_refine: 4,
        }
    }
}

fn result(id: u8, name: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult { id, name, passed, detail }
}

fn err_result(id: u8, name: &'static str, e: crate::Error) -> CriterionResult {
    result(id, name, false, format!("error: {e}"))
}

pub fn constants_reproduction() -> CriterionResult {
    let name = "constants reproduction";
    let k = match CriticalConstants::compute() {
        Ok(k) => k,
        Err(e) => return err_result(1, name, e),
    };
    let diffs = [
        (k.b1 - reference::B1).abs(),
        (k.b2 - reference::B2).abs(),
        (k.a - reference::A).abs(),
        (k.c - reference::C).abs(),
    ];
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    let psi_err = (k.psi - 0.381_966_011_250_105_1).abs();
    result(
        1,
        name,
        worst <= 1e-12 && psi_err <= 1e-14,
        format!("b1={:.15} b2={:.15} a={:.16} c={:.15} max|diff|={worst:.1e} psi_err={psi_err:.1e}", k.b1, k.b2, k.a, k.c),
    )
}

pub fn sharpness_identity() -> CriterionResult {
    let name = "sharpness identity";
    match constants::sharpness_identity_check() {
        Ok(r) => result(
            2,
            name,
            r.independent_vs_coupled <= 1e-12 && r.self_vs_coupled <= 1e-12,
            format!("|indep-coupled|={:.1e} |self-coupled|={:.1e}", r.independent_vs_coupled, r.self_vs_coupled),
        ),
        Err(e) => err_result(2, name, e),
    }
}

pub fn functional_zeros(seed: u64) -> CriterionResult {
    let name = "functional zeros";
    let run = || -> Result<(f64, f64)> {
        let sharp = Dist::two_point(reference::B2, reference::A)?;
        let mut worst_sharp: f64 = 0.0;
        for alpha in [0.0, DEFAULT_ALPHA, 0.5, 1.0] {
            let p = MixParams::new(alpha, DEFAULT_C)?;
            worst_sharp = worst_sharp.max(mixed_functional(&sharp, &p)?.total.abs());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_01: f64 = 0.0;
        for _ in 0..1000 {
            // The quantile coupling needs Pr(p = 1) <= 1/2.
            let m: f64 = 0.5 * rng.gen::<f64>();
            let d = Dist::new([(0.0, 1.0 - m), (1.0, m)])?;
            let p = MixParams::new(rng.gen(), DEFAULT_C)?;
            worst_01 = worst_01.max(mixed_functional(&d, &p)?.total.abs());
        }
        Ok((worst_sharp, worst_01))
    };
    match run() {
        Ok((s, z)) => result(
            3,
            name,
            s <= 1e-9 && z <= 1e-12,
            format!("sharpness law max|total|={s:.1e}; {{0,1}} laws max|total|={z:.1e}"),
        ),
        Err(e) => err_result(3, name, e),
    }
}

pub fn certification(grid: usize, refine: usize) -> CriterionResult {
    let name = "support-3 certification";
    let run = || -> Result<(f64, f64)> {
        let at = minimize_support3(&MixParams::new(DEFAULT_ALPHA, DEFAULT_C)?, grid, refine)?;
        let above = minimize_support3(&MixParams::new(DEFAULT_ALPHA, 0.383)?, grid, refine)?;
        Ok((at.min_value, above.min_value))
    };
    match run() {
        Ok((at, above)) => result(
            4,
            name,
            at >= -1e-6 && above < -1e-7,
            format!("grid={grid} refine={refine}: min at c*={at:.3e}, min at c=0.383={above:.3e}"),
        ),
        Err(e) => err_result(4, name, e),
    }
}

pub fn critical_constants() -> CriterionResult {
    let name = "critical constants";
    let run = || -> Result<(f64, f64, f64)> {
        let c0 = find_critical_c(0.0, 1e-7)?;
        let (alpha, c) = find_alpha(1e-3)?;
        Ok((c0, alpha, c))
    };
    match run() {
        Ok((c0, alpha, c)) => result(
            5,
            name,
            (c0 - 0.381966).abs() <= 5e-5 && (c - DEFAULT_C).abs() <= 1e-5 && (alpha - 0.0356).abs() <= 1e-3,
            format!("c(0)={c0:.7} alpha*={alpha:.5} c*={c:.7}"),
        ),
        Err(e) => err_result(5, name, e),
    }
}

pub fn single_term() -> CriterionResult {
    let name = "single-term counterexample";
    match single_term_counterexample(0.001) {
        Ok(r) => result(
            6,
            name,
            r.coupled_below_self && r.expectation_below_037,
            format!("coupled={:.6} self={:.6} E[p]={:.4}", r.term_coupled, r.term_self, r.expectation),
        ),
        Err(e) => err_result(6, name, e),
    }
}

/// Outcome of one randomised property suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed error or smallest observed slack, depending on the
    /// suite.
    pub worst: f64,
}

impl SuiteReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn normalized(raw: Vec<(f64, f64)>) -> Result<Dist> {
    let total: f64 = raw.iter().map(|p| p.1).sum();
    Dist::new(raw.into_iter().map(|(v, m)| (v, m / total)))
}

/// A random law with at least one atom in `(1/2, 1)`.
fn random_upper_law(rng: &mut ChaCha8Rng) -> Result<Dist> {
    let low = rng.gen_range(1..=3);
    let up = rng.gen_range(1..=2);
    let mut raw = Vec::new();
    for _ in 0..low {
        raw.push((0.5 * rng.gen::<f64>(), rng.gen::<f64>() + 0.05));
    }
    for _ in 0..up {
        raw.push((rng.gen_range(0.51..0.99), rng.gen::<f64>() + 0.05));
    }
    if rng.gen_bool(0.5) {
        raw.push((1.0, rng.gen::<f64>() + 0.05));
    }
    normalized(raw)
}

fn upper_atoms(d: &Dist) -> Vec<f64> {
    d.atoms()
        .iter()
        .map(|a| a.value)
        .filter(|&v| v > 0.5 && v < 1.0)
        .collect()
}

/// Strict improvement after moving an upper atom to `{1/2, 1}`.
pub fn lemma_reduction_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut done = 0;
    while done < trials {
        let d = random_upper_law(&mut rng)?;
        if d.expectation() > 0.39 {
            continue;
        }
        let ups = upper_atoms(&d);
        let y = ups[rng.gen_range(0..ups.len())];
        let w = if done % 10 == 0 { 1.044 } else { rng.gen_range(0.0..=1.044) };
        let r = reduction_direction_check(&d, y, w)?;
        worst = worst.min(r.lhs - r.rhs);
        violations += usize::from(!r.holds);
        done += 1;
    }
    Ok(SuiteReport {
        name: "upper-atom reduction",
        trials,
        violations,
        worst,
    })
}

fn antitone_cells(d: &Dist) -> Vec<Cell> {
    let asc: Vec<(f64, f64)> = d.atoms().iter().map(|a| (a.value, a.mass)).collect();
    let mut desc = asc.clone();
    desc.reverse();
    let (mut i, mut j) = (0, 0);
    let (mut left, mut right) = (asc[0].1, desc[0].1);
    let mut cells = Vec::new();
    while i < asc.len() && j < desc.len() {
        let m = left.min(right);
        if m > 0.0 {
            cells.push(Cell { x: asc[i].0, y: desc[j].0, mass: m });
        }
        left -= m;
        right -= m;
        if left <= 1e-15 {
            i += 1;
            left = asc.get(i).map_or(0.0, |a| a.1);
        }
        if right <= 1e-15 {
            j += 1;
            right = desc.get(j).map_or(0.0, |a| a.1);
        }
    }
    cells
}

/// Mixture of the independent, comonotone and antitone couplings of `d`.
fn random_coupling(d: &Dist, rng: &mut ChaCha8Rng) -> Result<Coupling> {
    let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let total: f64 = w.iter().sum();
    let parts = [
        Coupling::independent(d).cells().to_vec(),
        Coupling::diagonal(d).cells().to_vec(),
        antitone_cells(d),
    ];
    let cells = parts
        .iter()
        .zip(w)
        .flat_map(|(cells, wk)| {
            cells.iter().map(move |c| Cell {
                mass: c.mass * wk / total,
                ..*c
            })
        })
        .collect();
    Coupling::new(cells)
}

/// The coupled term never increases along the redistribution steps.
pub fn redistribution_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let d = random_upper_law(&mut rng)?;
        let mut cp = random_coupling(&d, &mut rng)?;
        let mut bad = false;
        while let Some(next) = cp.redistribute_upper_step() {
            let increase = term_coupled(&next) - term_coupled(&cp);
            worst = worst.max(increase);
            bad |= increase > 1e-12;
            cp = next;
        }
        violations += usize::from(bad);
    }
    Ok(SuiteReport {
        name: "coupled redistribution",
        trials,
        violations,
        worst,
    })
}

pub fn karamata_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let (a, b) = (0.5 * rng.gen::<f64>(), 0.5 * rng.gen::<f64>());
        let (c, d) = (0.5 * rng.gen::<f64>(), 0.5 * rng.gen::<f64>());
        let r = karamata_claim_check(a.min(b), a.max(b), c.max(d), c.min(d))?;
        worst = worst.min(r.lhs - r.rhs);
        violations += usize::from(!r.holds);
    }
    Ok(SuiteReport {
        name: "karamata claim",
        trials,
        violations,
        worst,
    })
}

/// Slope and curvature of `g` against their closed forms, plus the endpoint
/// inequality `2 g(0.39) < 1.044 g(0)`.
pub fn g_derivative_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = rng.gen_range(0.01..0.99);
        let y = rng.gen_range(0.51..0.99);
        let g = |t: f64| reduction_gain(t, y);
        let slope = LN_2 * central_first(g, x, FD_STEP);
        let err = (slope - reduction_gain_slope(x, y)).abs();
        worst = worst.max(err);
        let curvature = LN_2 * central_second(g, x, 1e-4);
        let ok = err <= 1e-6
            && reduction_gain_curvature(x, y) < 0.0
            && curvature < 0.0
            && 2.0 * reduction_gain(0.39, y) - 1.044 * reduction_gain(0.0, y) < 0.0;
        violations += usize::from(!ok);
    }
    SuiteReport {
        name: "g slope and curvature",
        trials,
        violations,
        worst,
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn f_mu_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = [0.1, 0.2, 0.3, 0.4];
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let k = rng.gen_range(1..5);
        let d = normalized((0..k).map(|_| (rng.gen_range(0.02..0.98), rng.gen::<f64>() + 0.01)).collect())?;
        let alpha = 0.5 * rng.gen::<f64>();
        let report = f_mu_derivative_check(&d, alpha, &grid);
        let err = report
            .points
            .iter()
            .map(|&(q, v)| relative(v, f_mu_third_order_closed_form(&d, alpha, q)))
            .fold(0.0, f64::max);
        worst = worst.max(err);
        violations += usize::from(!report.holds() || err > 1e-4);
    }
    Ok(SuiteReport {
        name: "F_mu third-order sign",
        trials,
        violations,
        worst,
    })
}

pub fn h2q_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for k in 0..trials {
        let q = match k {
            0 => 0.1,
            1 => 0.2,
            _ => rng.gen_range(0.05..0.4),
        };
        let third = relative(h2q_third_order_fd(q), -2.0 / (1.0 - 2.0 * q).powi(2));
        let second = relative(h2q_curvature_fd(q), -2.0 / ((1.0 - 2.0 * q) * q));
        worst = worst.max(third);
        violations += usize::from(third > 1e-4 || second > 1e-5);
    }
    SuiteReport {
        name: "h(2q) derivatives",
        trials,
        violations,
        worst,
    }
}

pub fn property_suites(trials: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        lemma_reduction_suite(trials, seed)?,
        redistribution_suite(trials, seed + 1)?,
        karamata_suite(trials, seed + 2)?,
        g_derivative_suite(trials, seed + 3),
        f_mu_suite(trials, seed + 4)?,
        h2q_suite(trials, seed + 5),
    ])
}

pub fn lemma_properties(trials: usize, seed: u64) -> CriterionResult {
    let name = "lemma property suites";
    match property_suites(trials, seed) {
        Ok(suites) => {
            let passed = suites.iter().all(SuiteReport::holds);
            let detail = suites
                .iter()
                .map(|s| format!("{}: {}/{} violations", s.name, s.violations, s.trials))
                .collect::<Vec<_>>()
                .join("; ");
            result(7, name, passed, detail)
        }
        Err(e) => err_result(7, name, e),
    }
}

/// A random nonempty family on `[n]`, each subset kept with probability 1/2.
pub fn random_family(n: u32, rng: &mut impl Rng) -> Result<SetFamily> {
    loop {
        let masks: Vec<u32> = (0..(1u32 << n)).filter(|_| rng.gen_bool(0.5)).collect();
        if !masks.is_empty() {
            return SetFamily::new(n, masks);
        }
    }
}

pub fn exact_sampler(random_families: usize, seed: u64) -> CriterionResult {
    let name = "exact sampler";
    let run = || -> Result<(usize, f64, f64, f64)> {
        let mut families = Vec::new();
        for n in 1..=3 {
            families.extend(enumerate_union_closed(n)?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random_families {
            families.push(random_family(4, &mut rng)?);
        }
        let (mut marg, mut union, mut chain): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for f in &families {
            let audit = audit_coupling(f)?;
            marg = marg.max(audit.max_marginal_deviation);
            union = union.max(audit.max_union_formula_error);
            let sum: f64 = conditional_entropies(f).iter().sum();
            chain = chain.max((sum - (f.len() as f64).log2()).abs());
        }
        Ok((families.len(), marg, union, chain))
    };
    match run() {
        Ok((count, marg, union, chain)) => result(
            8,
            name,
            marg <= 1e-12 && union <= 1e-13 && chain <= 1e-12,
            format!("{count} families: marginal dev={marg:.1e} union formula err={union:.1e} chain rule err={chain:.1e}"),
        ),
        Err(e) => err_result(8, name, e),
    }
}

pub fn monte_carlo_consistency(families: usize, samples: u64, seed: u64) -> CriterionResult {
    let name = "monte carlo consistency";
    let run = || -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for k in 0..families {
            let n = 2 + (k % 3) as u32;
            let f = random_family(n, &mut rng)?;
            worst = worst.max(monte_carlo_max_z(&f, samples, seed + k as u64)?);
        }
        Ok(worst)
    };
    match run() {
        Ok(z) => result(9, name, z <= 4.0, format!("{families} families x {samples} samples: max z-score={z:.2}")),
        Err(e) => err_result(9, name, e),
    }
}

pub fn conjecture_oracle() -> CriterionResult {
    let name = "brute-force conjecture oracle";
    let run = || -> Result<(bool, String)> {
        let mut cross_ok = true;
        for n in 1..=3 {
            let mut fast: Vec<Vec<u32>> = enumerate_union_closed(n)?.iter().map(|f| f.sets().to_vec()).collect();
            let mut naive: Vec<Vec<u32>> = enumerate_union_closed_naive(n)?.iter().map(|f| f.sets().to_vec()).collect();
            fast.sort();
            naive.sort();
            cross_ok &= fast == naive;
        }
        let mut ok = cross_ok;
        let mut parts = Vec::new();
        for n in 1..=4 {
            let r = conjecture_check(n, 0.5)?;
            ok &= r.holds() && r.min_max_ratio >= 0.5;
            parts.push(format!("n={n}: {} families, min ratio {}", r.families, r.min_max_ratio));
        }
        Ok((ok, format!("cross-check n<=3 {}; {}", if cross_ok { "ok" } else { "MISMATCH" }, parts.join("; "))))
    };
    match run() {
        Ok((ok, detail)) => result(10, name, ok, detail),
        Err(e) => err_result(10, name, e),
    }
}

/// Runs every criterion in order, calling `on_result` as each finishes.
pub fn run_all(cfg: &ReproConfig, mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let steps: Vec<Box<dyn Fn() -> CriterionResult + '_>> = vec![
        Box::new(constants_reproduction),
        Box::new(sharpness_identity),
        Box::new(|| functional_zeros(cfg.seed)),
        Box::new(|| certification(cfg.certification_grid, cfg.certification_refine)),
        Box::new(critical_constants),
        Box::new(single_term),
        Box::new(|| lemma_properties(cfg.trials, cfg.seed)),
        Box::new(|| exact_sampler(cfg.random_families, cfg.seed)),
        Box::new(|| monte_carlo_consistency(cfg.mc_families, cfg.mc_samples, cfg.seed)),
        Box::new(conjecture_oracle),
    ];
    steps
        .iter()
        .map(|step| {
            let r = step();
            on_result(&r);
            r
        })
        .collect()
}
