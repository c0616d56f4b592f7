//! The three expectation terms of the mixed entropy inequality and their
//! combination
//!
//! ```text
//! total = (1-α) E[h(p+q-pq)] + α E[h(max(p, r, min(p+r, 1/2)))] - E[h(p)]
//! ```
//!
//! where `q` is an independent copy of `p` and `(p, r)` follows the quantile
//! coupling. The module also carries the derivative-sign checks behind the
//! reduction to small supports and the closed-form analysis of two-point laws.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::dist::{quantile_coupling, Coupling, Dist, MERGE_TOL};
use crate::entropy::h;
use crate::error::{Error, Result};

/// Step for first and second central differences.
pub const FD_STEP: f64 = 1e-5;
/// Step of the five-point stencils used by the nested third-order check.
/// Plain central differences lose too many digits when nested.
pub const FD_NESTED_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixParams {
    pub alpha: f64,
    pub c: f64,
}

impl MixParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Precondition(format!("alpha = {alpha} outside [0, 1]")));
        }
        if !(c > 0.0 && c < 0.5) {
            return Err(Error::Precondition(format!("c = {c} outside (0, 1/2)")));
        }
        Ok(MixParams { alpha, c })
    }
}

impl Default for MixParams {
    fn default() -> Self {
        MixParams {
            alpha: crate::constants::DEFAULT_ALPHA,
            c: crate::constants::DEFAULT_C,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalBreakdown {
    pub term_indep: f64,
    pub term_coupled: f64,
    pub term_self: f64,
    pub total: f64,
}

impl FunctionalBreakdown {
    pub fn from_terms(alpha: f64, term_indep: f64, term_coupled: f64, term_self: f64) -> Self {
        FunctionalBreakdown {
            term_indep,
            term_coupled,
            term_self,
            total: (1.0 - alpha) * term_indep + alpha * term_coupled - term_self,
        }
    }
}

/// `max(p, r, min(p + r, 1/2))`.
#[inline]
pub fn coupled_union_value(p: f64, r: f64) -> f64 {
    p.max(r).max((p + r).min(0.5))
}

/// `E[h(p + q - pq)]` for independent `p, q ~ d`.
pub fn term_independent(d: &Dist) -> f64 {
    let atoms = d.atoms();
    let mut sum = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        sum += a.mass * a.mass * h(2.0 * a.value - a.value * a.value);
        for b in &atoms[i + 1..] {
            sum += 2.0 * a.mass * b.mass * h(a.value + b.value - a.value * b.value);
        }
    }
    sum
}

/// `E[h(max(p, r, min(p + r, 1/2)))]` under the given coupling.
pub fn term_coupled(cp: &Coupling) -> f64 {
    cp.cells()
        .iter()
        .map(|c| c.mass * h(coupled_union_value(c.x, c.y)))
        .sum()
}

/// The coupled term under the quantile coupling. Only diagonal cells with
/// both coordinates below `1` contribute, each with `h(min(2x, 1/2))`.
pub fn term_coupled_quantile(d: &Dist) -> Result<f64> {
    let cp = quantile_coupling(d)?;
    Ok(cp
        .cells()
        .iter()
        .filter(|c| (c.x - c.y).abs() < MERGE_TOL && c.x < 1.0)
        .map(|c| c.mass * h((2.0 * c.x).min(0.5)))
        .sum())
}

/// `E[h(p)]`.
pub fn term_self(d: &Dist) -> f64 {
    d.atoms().iter().map(|a| a.mass * h(a.value)).sum()
}

/// Evaluates all three terms. The expectation bound in `params` is not
/// enforced here.
pub fn mixed_functional(d: &Dist, params: &MixParams) -> Result<FunctionalBreakdown> {
    Ok(FunctionalBreakdown::from_terms(
        params.alpha,
        term_independent(d),
        term_coupled_quantile(d)?,
        term_self(d),
    ))
}

pub fn central_first(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}

pub fn central_second(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)
}

pub fn five_point_first(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (8.0 * (f(x + step) - f(x - step)) - (f(x + 2.0 * step) - f(x - 2.0 * step))) / (12.0 * step)
}

pub fn five_point_second(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (-f(x + 2.0 * step) + 16.0 * f(x + step) - 30.0 * f(x) + 16.0 * f(x - step) - f(x - 2.0 * step))
        / (12.0 * step * step)
}

/// `d/dq (q(1-q) f''(q))` by nested five-point differences.
pub fn nested_third_order(f: impl Fn(f64) -> f64, q: f64) -> f64 {
    let weighted = |t: f64| t * (1.0 - t) * five_point_second(&f, t, FD_NESTED_STEP);
    five_point_first(weighted, q, FD_NESTED_STEP)
}

/// `F(q) = E_{p~d}[2(1-α) h(p + q - pq) - h(q)]`.
pub fn f_mu(d: &Dist, alpha: f64, q: f64) -> f64 {
    let inner: f64 = d
        .atoms()
        .iter()
        .map(|a| a.mass * h(a.value + q - a.value * q))
        .sum();
    2.0 * (1.0 - alpha) * inner - h(q)
}

/// Closed form of `d/dq (q(1-q) F''(q))`:
/// `-2(1-α)/ln 2 · E[p(1-p)/(p+q-pq)²]`.
pub fn f_mu_third_order_closed_form(d: &Dist, alpha: f64, q: f64) -> f64 {
    let e: f64 = d
        .atoms()
        .iter()
        .map(|a| {
            let s = a.value + q - a.value * q;
            a.mass * a.value * (1.0 - a.value) / (s * s)
        })
        .sum();
    -2.0 * (1.0 - alpha) / LN_2 * e
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeSignReport {
    /// `(q, d/dq (q(1-q) F''(q)))` per grid point.
    pub points: Vec<(f64, f64)>,
    /// Grid points where the value is not negative.
    pub violations: Vec<f64>,
}

impl DerivativeSignReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `d/dq (q(1-q) F''(q)) < 0` on each grid point.
pub fn f_mu_derivative_check(d: &Dist, alpha: f64, q_grid: &[f64]) -> DerivativeSignReport {
    let points: Vec<(f64, f64)> = q_grid
        .iter()
        .map(|&q| (q, nested_third_order(|t| f_mu(d, alpha, t), q)))
        .collect();
    let violations = points.iter().filter(|(_, v)| !(*v < 0.0)).map(|(q, _)| *q).collect();
    DerivativeSignReport { points, violations }
}

/// `ln 2 · d²/dq² h(2q)` by central differences.
pub fn h2q_curvature_fd(q: f64) -> f64 {
    LN_2 * central_second(|t| h(2.0 * t), q, FD_STEP)
}

/// `ln 2 · d/dq (q(1-q) d²/dq² h(2q))` by nested central differences.
pub fn h2q_third_order_fd(q: f64) -> f64 {
    LN_2 * nested_third_order(|t| h(2.0 * t), q)
}

/// `(1-α)(1-a)² h(2b-b²) + α(1-2a) h(min(2b, 1/2)) - (1-a) h(b)`, the total
/// for `{b: 1-a, 1: a}` under the quantile coupling.
pub fn atomic_case_value(b: f64, params: &MixParams, a: f64) -> f64 {
    let alpha = params.alpha;
    (1.0 - alpha) * (1.0 - a).powi(2) * h(2.0 * b - b * b) + alpha * (1.0 - 2.0 * a) * h((2.0 * b).min(0.5))
        - (1.0 - a) * h(b)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VertexReport {
    pub b: f64,
    pub leading_coefficient: f64,
    pub vertex: f64,
    /// `(c - b) / (1 - b)`, the largest admissible `a`.
    pub boundary: f64,
    pub holds: bool,
}

/// The quadratic in `a` from [`atomic_case_value`] is minimised at
/// `1 + (2α h(min(2b,1/2)) - h(b)) / (2(1-α) h(2b-b²))`; when that vertex lies
/// beyond the admissible range the minimum sits on the boundary `E[p] = c`.
pub fn atomic_vertex_check(b: f64, params: &MixParams) -> VertexReport {
    let alpha = params.alpha;
    let h_union = h(2.0 * b - b * b);
    let leading_coefficient = (1.0 - alpha) * h_union;
    let vertex = 1.0 + (2.0 * alpha * h((2.0 * b).min(0.5)) - h(b)) / (2.0 * leading_coefficient);
    let boundary = (params.c - b) / (1.0 - b);
    VertexReport {
        b,
        leading_coefficient,
        vertex,
        boundary,
        holds: leading_coefficient > 0.0 && vertex > boundary,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingleTermReport {
    pub a: f64,
    pub expectation: f64,
    pub term_coupled: f64,
    pub term_self: f64,
    pub coupled_below_self: bool,
    pub expectation_below_037: bool,
}

/// The law `{1/4: 1-a, 1: a}` with `a = (1-h(1/4))/(2-h(1/4)) + eps`: the
/// coupled term alone drops below `E[h(p)]` while `E[p] < 0.37`.
pub fn single_term_counterexample(eps: f64) -> Result<SingleTermReport> {
    let b = 0.25;
    let a = crate::constants::derive_a(b) + eps;
    let d = Dist::two_point(b, a)?;
    let tc = term_coupled_quantile(&d)?;
    let ts = term_self(&d);
    let expectation = d.expectation();
    Ok(SingleTermReport {
        a,
        expectation,
        term_coupled: tc,
        term_self: ts,
        coupled_below_self: tc < ts,
        expectation_below_037: expectation < 0.37,
    })
}
