//! Command-line front end. Every subcommand prints one JSON object with a
//! `"meta"` key to stdout; logs and the `repro` table go to stderr.
//!
//! Exit codes: 0 success, 1 a checked inequality failed, 2 usage or input
//! error, 3 resource guard.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::constants::{sharpness_identity_check, CriticalConstants, DEFAULT_ALPHA, DEFAULT_C};
use crate::dist::Dist;
use crate::entropy::{shannon_entropy, FiniteLaw};
use crate::error::{Error, Result};
use crate::family::{conjecture_check, frequencies, is_union_closed, SetFamily};
use crate::functional::{mixed_functional, MixParams};
use crate::optimizer::{
    find_alpha_with, find_critical_c_with, minimize_support3_with, regime_scan_with, CriticalSearch,
    MinimizerConfig, CERT_TOL, DEFAULT_SCAN_RESOLUTION,
};
use crate::repro::{run_all, ReproConfig};
use crate::sampler::{
    audit_coupling, entropy_comparison, exact_joint_law, monte_carlo, monte_carlo_max_z, per_element_inequality_check,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "uc-entropy", version, about = "Entropy inequalities behind the union-closed sets bound")]
struct Cli {
    /// Round floating-point output to this many significant digits.
    #[arg(long, global = true)]
    digits: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct ParamArgs {
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the named constants from scratch.
    Constants,
    /// Evaluate the functional on a law read from a JSON file.
    Eval {
        #[arg(long)]
        dist: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Grid-minimise the functional over support-3 laws with E[p] <= c.
    Minimize {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        refine: usize,
    },
    /// Largest c certified at a given alpha.
    CriticalC {
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 40)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        refine: usize,
    },
    /// Weight alpha maximising the critical c.
    FindAlpha {
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 40)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        refine: usize,
    },
    /// Write the two regime slices as CSV.
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SCAN_RESOLUTION)]
        grid: usize,
    },
    /// Union-closed family tools.
    Family {
        #[command(subcommand)]
        command: FamilyCommand,
    },
    /// Coupled sampling of two members of a family.
    Simulate {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute the exact joint law.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Per-coordinate entropy inequality on a family.
    CheckPerElement {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run every reproduction check and print a pass/fail table.
    Repro {
        #[arg(long, default_value_t = ReproConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = ReproConfig::default().trials)]
        trials: usize,
        #[arg(long, default_value_t = ReproConfig::default().mc_samples)]
        samples: u64,
    },
}

#[derive(Debug, Subcommand)]
enum FamilyCommand {
    /// Union-closure and frequencies of a family file.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Check every union-closed family on [n] against a frequency threshold.
    Enumerate {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunMetadata {
    fn new(command: &str, parameters: Value, seed: Option<u64>) -> Self {
        let parameters = match parameters {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        RunMetadata {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

struct Output {
    meta: RunMetadata,
    body: Value,
    code: i32,
}

impl Output {
    fn new(meta: RunMetadata, body: impl Serialize, passed: bool) -> Result<Self> {
        Ok(Output {
            meta,
            body: serde_json::to_value(body)?,
            code: if passed { EXIT_OK } else { EXIT_FAILED },
        })
    }
}

/// Parses `argv` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn dispatch_to<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run(&cli, err) {
        Ok(output) => {
            let mut body = output.body;
            if let Some(d) = cli.digits {
                round_json(&mut body, d);
            }
            let mut object = Map::new();
            object.insert("meta".into(), serde_json::to_value(&output.meta).unwrap_or(Value::Null));
            match body {
                Value::Object(map) => object.extend(map),
                other => {
                    object.insert("result".into(), other);
                }
            }
            let _ = writeln!(out, "{}", Value::Object(object));
            output.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Bracket { .. } => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Rounds every float in `v` to `digits` significant digits.
fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x);
                if let Some(num) = serde_json::Number::from_f64(rounded) {
                    *n = num;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_json(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_family(path: &Path) -> Result<SetFamily> {
    SetFamily::from_json(&read_file(path)?)
}

fn params_of(p: &ParamArgs) -> Result<MixParams> {
    MixParams::new(p.alpha, p.c)
}

fn search(grid: usize, refine: usize) -> CriticalSearch {
    CriticalSearch {
        minimizer: MinimizerConfig {
            grid,
            refine,
            ..MinimizerConfig::default()
        },
        ..CriticalSearch::default()
    }
}

fn run(cli: &Cli, log: &mut dyn Write) -> Result<Output> {
    match &cli.command {
        Command::Constants => {
            let k = CriticalConstants::compute()?;
            let sharp = sharpness_identity_check()?;
            let meta = RunMetadata::new("constants", json!({}), None);
            Output::new(
                meta,
                json!({ "constants": k, "sharpness": sharp }),
                sharp.holds(1e-12),
            )
        }
        Command::Eval { dist, params } => {
            let p = params_of(params)?;
            let d: Dist = serde_json::from_str(&read_file(dist)?)?;
            let breakdown = mixed_functional(&d, &p)?;
            let within = d.expectation() <= p.c;
            let nonnegative = breakdown.total >= -1e-12;
            let meta = RunMetadata::new("eval", json!({ "dist": dist, "alpha": p.alpha, "c": p.c }), None);
            Output::new(
                meta,
                json!({
                    "breakdown": breakdown,
                    "expectation": d.expectation(),
                    "within_constraint": within,
                    "nonnegative": nonnegative,
                }),
                !within || nonnegative,
            )
        }
        Command::Minimize { params, grid, refine } => {
            let p = params_of(params)?;
            let cfg = MinimizerConfig::new(*grid, *refine);
            let r = minimize_support3_with(&p, &cfg)?;
            let certified = r.min_value >= -CERT_TOL;
            let meta = RunMetadata::new("minimize", json!({ "alpha": p.alpha, "c": p.c, "config": cfg }), None);
            Output::new(
                meta,
                json!({ "result": r, "expectation": r.argmin.expectation(), "certified": certified, "tolerance": CERT_TOL }),
                certified,
            )
        }
        Command::CriticalC { alpha, tol, grid, refine } => {
            let s = search(*grid, *refine);
            let c = find_critical_c_with(*alpha, *tol, &s)?;
            let meta = RunMetadata::new("critical-c", json!({ "alpha": alpha, "tol": tol, "search": s }), None);
            Output::new(meta, json!({ "alpha": alpha, "critical_c": c }), true)
        }
        Command::FindAlpha { tol, grid, refine } => {
            let s = search(*grid, *refine);
            let (alpha, c) = find_alpha_with(*tol, &s)?;
            let meta = RunMetadata::new("find-alpha", json!({ "tol": tol, "search": s }), None);
            Output::new(meta, json!({ "alpha": alpha, "critical_c": c }), true)
        }
        Command::Scan { params, out, grid } => {
            let p = params_of(params)?;
            let summary = regime_scan_with(&p, out, *grid)?;
            let meta = RunMetadata::new(
                "scan",
                json!({ "alpha": p.alpha, "c": p.c, "out": out, "grid": grid }),
                None,
            );
            Output::new(meta, summary, true)
        }
        Command::Family { command } => match command {
            FamilyCommand::Check { file, threshold } => {
                let f = read_family(file)?;
                let closed = is_union_closed(&f);
                let freq = frequencies(&f);
                let meets = freq.max_ratio >= *threshold;
                let meta = RunMetadata::new("family check", json!({ "file": file, "threshold": threshold }), None);
                Output::new(
                    meta,
                    json!({
                        "family": f,
                        "union_closed": closed,
                        "frequencies": freq,
                        "meets_threshold": meets,
                    }),
                    !closed || meets || f.is_empty_set_only(),
                )
            }
            FamilyCommand::Enumerate { n, threshold } => {
                let r = conjecture_check(*n, *threshold)?;
                let meta = RunMetadata::new("family enumerate", json!({ "n": n, "threshold": threshold }), None);
                let holds = r.holds();
                Output::new(meta, r, holds)
            }
        },
        Command::Simulate {
            family,
            samples,
            seed,
            exact,
            params,
        } => {
            let p = params_of(params)?;
            let f = read_family(family)?;
            let mc = monte_carlo(&f, *samples, *seed);
            let n = *samples as f64;
            let target = 1.0 / f.len() as f64;
            let margin = |m: BTreeMap<u32, u64>| {
                f.sets()
                    .iter()
                    .map(|s| (m.get(s).copied().unwrap_or(0) as f64 / n - target).abs())
                    .fold(0.0, f64::max)
            };
            let empirical = |pairs: Vec<(u32, f64)>| -> Result<f64> { Ok(shannon_entropy(&FiniteLaw::from_accumulated(pairs)?)) };
            let h_a = empirical(mc.counts.iter().map(|(k, &v)| (k.0, v as f64 / n)).collect())?;
            let h_union = empirical(mc.counts.iter().map(|(k, &v)| (k.0 | k.1, v as f64 / n)).collect())?;
            let mut body = json!({
                "family_size": f.len(),
                "samples": samples,
                "rng": mc.rng,
                "empirical": {
                    "h_a": h_a,
                    "h_union_coupled": h_union,
                    "max_marginal_deviation_a": margin(mc.marginal_a()),
                    "max_marginal_deviation_c": margin(mc.marginal_c()),
                },
                "counts": mc,
            });
            let mut passed = true;
            if *exact {
                let audit = audit_coupling(&f)?;
                passed = audit.max_marginal_deviation <= 1e-12 && audit.max_union_formula_error <= 1e-13;
                body["exact"] = json!({
                    "joint_law": exact_joint_law(&f)?,
                    "entropies": entropy_comparison(&f, &p)?,
                    "audit": audit,
                    "max_z_score": monte_carlo_max_z(&f, *samples, *seed)?,
                });
            }
            let meta = RunMetadata::new(
                "simulate",
                json!({ "family": family, "samples": samples, "exact": exact, "alpha": p.alpha }),
                Some(*seed),
            );
            Output::new(meta, body, passed)
        }
        Command::CheckPerElement { family, params } => {
            let p = params_of(params)?;
            let f = read_family(family)?;
            let r = per_element_inequality_check(&f, &p)?;
            let meta = RunMetadata::new("check-per-element", json!({ "family": family, "alpha": p.alpha, "c": p.c }), None);
            let holds = r.holds();
            Output::new(meta, json!({ "report": r, "violations": r.violations() }), holds)
        }
        Command::Repro { seed, trials, samples } => {
            let cfg = ReproConfig {
                seed: *seed,
                trials: *trials,
                mc_samples: *samples,
                ..ReproConfig::default()
            };
            let start = Instant::now();
            let results = run_all(&cfg, |r| {
                let _ = writeln!(
                    log,
                    "[{:>2}] {:<32} {}  ({:.1}s)  {}",
                    r.id,
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    start.elapsed().as_secs_f64(),
                    r.detail
                );
            });
            let passed = results.iter().all(|r| r.passed);
            let meta = RunMetadata::new("repro", serde_json::to_value(cfg)?, Some(*seed));
            Output::new(meta, json!({ "criteria": results, "all_passed": passed }), passed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("uc-entropy").chain(args.iter().copied());
        let code = dispatch_to(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn constants_command() {
        let (code, out, _) = run_cli(&["constants"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["meta"]["command"], "constants");
        assert!((v["constants"]["b2"].as_f64().unwrap() - 0.329454738503037).abs() < 1e-12);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (code, out, err) = run_cli(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(!err.is_empty());
        assert_eq!(run_cli(&[]).0, EXIT_USAGE);
    }

    #[test]
    fn digits_rounding() {
        let mut v = json!({ "x": 0.123456789, "y": [1.0, 2.345678], "n": 3 });
        round_json(&mut v, 3);
        assert_eq!(v, json!({ "x": 0.123, "y": [1.0, 2.35], "n": 3 }));
    }

    #[test]
    fn invalid_params_are_usage_errors() {
        assert_eq!(run_cli(&["minimize", "--alpha", "1.5", "--grid", "4"]).0, EXIT_USAGE);
        assert_eq!(run_cli(&["minimize", "--c", "0.7", "--grid", "4"]).0, EXIT_USAGE);
    }

    #[test]
    fn resource_guard_exit_code() {
        assert_eq!(run_cli(&["family", "enumerate", "--n", "5"]).0, EXIT_RESOURCE);
    }
}
