//! Configuration-driven runs: constant estimation, Hardy audits, extension checks,
//! parameter sweeps and the invariant suite, with results written to disk.

mod config;
mod output;
pub mod verify;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

pub use config::{
    ConfigError, ExtensionConfig, Format, HardyConfig, OutputConfig, RunConfig, SolverConfig,
    Subcommand, SweepConfig,
};
pub use output::write_atomic;

use crate::corpus::{decaying_profile, interval_corpus, rng};
use crate::error::{Error, Result};
use crate::extension::{extend, extension_norm, sobolev_norm};
use crate::extremal::{
    default_initial, el_residual, minimize_rayleigh, shoot_el, ExtremalResult, MinimizeOptions,
    TraceRecord,
};
use crate::mesh::{build_grid, GridFunction, GridSpec, SampledProfile, SpacingLaw};
use crate::norms::{classify_regime, hardy_constants_with_exponent, HardyReport, Regime};
use crate::operators::ProblemParams;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Success = 0,
    Config = 1,
    Regime = 2,
    NonConvergence = 3,
    Io = 4,
    ChecksFailed = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::Regime(_) => ExitStatus::Regime,
            Error::Io(_) => ExitStatus::Io,
            Error::Config(_) | Error::InvalidArgument(_) => ExitStatus::Config,
            _ => ExitStatus::NonConvergence,
        }
    }
}

impl From<&ConfigError> for ExitStatus {
    fn from(e: &ConfigError) -> Self {
        match e {
            ConfigError::Invalid(_) => ExitStatus::Config,
            ConfigError::Regime(_) => ExitStatus::Regime,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StartRecord {
    pub index: usize,
    #[serde(rename = "S_estimate")]
    pub s_estimate: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShootingCheck {
    #[serde(rename = "S_implied")]
    pub s_implied: f64,
    pub relative_difference: f64,
}

/// Result record of one constant estimation.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantRecord {
    pub params: ProblemParams,
    #[serde(rename = "S_estimate")]
    pub s_estimate: f64,
    pub lambda: f64,
    /// `|2*λ − 2S|/S`
    pub lagrange_defect: f64,
    pub el_residual: f64,
    pub relative_residual: f64,
    /// relative residual of `z_S` with unit multiplier
    pub rescaled_residual: f64,
    pub half_mass_radius: f64,
    pub iterations: usize,
    pub converged: bool,
    pub min_over_max: f64,
    pub starts: Vec<StartRecord>,
    pub shooting: Option<ShootingCheck>,
    pub trace: Vec<TraceRecord>,
}

struct Artifacts {
    status: ExitStatus,
    result: serde_json::Value,
    csv: Vec<(String, String)>,
    summary: String,
}

fn options(config: &RunConfig) -> MinimizeOptions {
    MinimizeOptions {
        tol_q: config.solver.tol_q,
        tol_r: config.solver.tol_r,
        max_iter: config.solver.max_iter,
        ..MinimizeOptions::default()
    }
}

/// Starting profile `index`: the default guess first, then seeded random decaying profiles
/// on independent streams of the root seed.
pub fn start_profile(
    grid: &Arc<crate::mesh::RadialGrid>,
    params: &ProblemParams,
    seed: u64,
    index: usize,
) -> GridFunction {
    if index == 0 {
        return default_initial(grid, params);
    }
    let mut g = rng(seed, 1000 + index as u64);
    let f = decaying_profile(&mut g, params);
    GridFunction::from_fn(grid.clone(), |r| f.eval(r))
}

fn estimate(params: &ProblemParams, grid: &GridSpec, config: &RunConfig) -> Result<(ConstantRecord, ExtremalResult)> {
    let grid = Arc::new(grid.build()?);
    let opts = options(config);
    let runs: Vec<Result<ExtremalResult>> = (0..config.solver.multi_start)
        .into_par_iter()
        .map(|i| minimize_rayleigh(params, &start_profile(&grid, params, config.seed, i), &opts))
        .collect();
    let starts = runs
        .iter()
        .enumerate()
        .map(|(index, r)| match r {
            Ok(r) => StartRecord {
                index,
                s_estimate: Some(r.s_estimate),
                converged: r.converged,
                iterations: r.iterations,
                error: None,
            },
            Err(e) => StartRecord { index, s_estimate: None, converged: false, iterations: 0, error: Some(e.to_string()) },
        })
        .collect();
    let mut best: Option<ExtremalResult> = None;
    let mut first_err = None;
    for r in runs {
        match r {
            Ok(r) => {
                let better = best.as_ref().map_or(true, |b| {
                    (r.converged, -r.s_estimate) > (b.converged, -b.s_estimate)
                });
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let res = match best {
        Some(r) => r,
        None => return Err(first_err.expect("at least one start")),
    };
    let q = params.p_star().expect("validated Sobolev parameters");
    let z = res.rescaled_profile();
    let rescaled_residual = el_residual(&z, 1.0, params)? / el_residual(&z, 0.0, params)?;
    let shooting = if params.r_max.is_infinite() && params.m <= 2 {
        shoot_el(params, 1.0).ok().map(|s| ShootingCheck {
            s_implied: s.s_implied,
            relative_difference: (s.s_implied - res.s_estimate).abs() / res.s_estimate,
        })
    } else {
        None
    };
    let record = ConstantRecord {
        params: *params,
        s_estimate: res.s_estimate,
        lambda: res.lagrange_multiplier,
        lagrange_defect: (q * res.lagrange_multiplier - 2.0 * res.s_estimate).abs() / res.s_estimate,
        el_residual: res.el_residual,
        relative_residual: res.relative_residual,
        rescaled_residual,
        half_mass_radius: res.half_mass_radius,
        iterations: res.iterations,
        converged: res.converged,
        min_over_max: res.min_over_max,
        starts,
        shooting,
        trace: res.trace.clone(),
    };
    Ok((record, res))
}

fn constant_lines(r: &ConstantRecord) -> String {
    let mut s = format!(
        "m = {}, p = {}, α = {}, θ = {}, R = {}\nS_estimate = {:.12}\nλ = {:.12}\n|2*λ − 2S|/S = {:.3e}\nrelative residual = {:.3e}\nz_S residual = {:.3e}\nhalf-mass radius = {:.12}\niterations = {}\nconverged = {}\nmin/max = {:.6}\n",
        r.params.m, r.params.p, r.params.alpha, r.params.theta, r.params.r_max, r.s_estimate, r.lambda,
        r.lagrange_defect, r.relative_residual, r.rescaled_residual, r.half_mass_radius, r.iterations,
        r.converged, r.min_over_max,
    );
    if let Some(sh) = &r.shooting {
        s += &format!("shooting S = {:.12} (relative difference {:.3e})\n", sh.s_implied, sh.relative_difference);
    }
    s
}

fn run_constant(config: &RunConfig) -> Result<Artifacts> {
    let (record, res) = estimate(&config.params(), &config.grid, config)?;
    let status = if record.converged { ExitStatus::Success } else { ExitStatus::NonConvergence };
    Ok(Artifacts {
        status,
        summary: constant_lines(&record),
        result: serde_json::to_value(&record).expect("serializable"),
        csv: vec![("profile.csv".into(), SampledProfile::from_function(&res.profile).to_csv())],
    })
}

fn run_sweep(config: &RunConfig) -> Result<Artifacts> {
    let entries = config.sweep_entries().map_err(|e| Error::Config(e.to_string()))?;
    let base = config.params();
    let runs: Vec<Result<(ConstantRecord, ExtremalResult)>> = entries
        .par_iter()
        .map(|&(alpha, theta)| estimate(&ProblemParams { alpha, theta, ..base }, &config.grid, config))
        .collect();
    let mut records = Vec::new();
    let mut csv = Vec::new();
    let mut table = String::from("alpha      theta      S_estimate          converged  trend\n");
    let mut prev: Option<f64> = None;
    for (i, r) in runs.into_iter().enumerate() {
        let (rec, res) = r?;
        let trend = match prev {
            None => "-",
            Some(p) if rec.s_estimate > p => "up",
            Some(p) if rec.s_estimate < p => "down",
            Some(_) => "flat",
        };
        table += &format!(
            "{:<10} {:<10} {:<19.12} {:<10} {}\n",
            rec.params.alpha, rec.params.theta, rec.s_estimate, rec.converged, trend
        );
        prev = Some(rec.s_estimate);
        csv.push((format!("profile_{i}.csv"), SampledProfile::from_function(&res.profile).to_csv()));
        records.push(rec);
    }
    let status = if records.iter().all(|r| r.converged) { ExitStatus::Success } else { ExitStatus::NonConvergence };
    Ok(Artifacts { status, result: json!({ "records": records }), csv, summary: table })
}

#[derive(Clone, Debug, Serialize)]
struct RegimeRecord {
    regime: Regime,
    sobolev_gap: f64,
    sobolev_condition: std::result::Result<(), String>,
    p_star: Option<f64>,
}

fn run_regime(config: &RunConfig) -> Artifacts {
    let params = config.params();
    let rec = RegimeRecord {
        regime: classify_regime(params.p, params.alpha - (params.m as f64 - 1.0) * params.p),
        sobolev_gap: params.sobolev_gap(),
        sobolev_condition: params.sobolev_condition(),
        p_star: params.p_star(),
    };
    let summary = format!(
        "regime = {:?}\nα−mp+1 = {}\nSobolev condition: {}\n",
        rec.regime,
        rec.sobolev_gap,
        match &rec.sobolev_condition {
            Ok(()) => "holds".to_string(),
            Err(e) => e.clone(),
        }
    );
    Artifacts { status: ExitStatus::Success, result: serde_json::to_value(&rec).expect("serializable"), csv: vec![], summary }
}

fn run_hardy(config: &RunConfig) -> Result<Artifacts> {
    let params = config.params();
    let q = match config.hardy.q {
        Some(q) => q,
        None => (params.theta + 1.0) * params.p / params.sobolev_gap(),
    };
    let report: HardyReport = hardy_constants_with_exponent(
        params.m,
        params.p,
        params.alpha,
        params.theta,
        config.hardy.side,
        params.r_max,
        q,
    )?;
    let bound = |b: Option<f64>| b.map_or("none".to_string(), |b| format!("{b:.9}"));
    let summary = format!(
        "side = {:?}, q = {}\nA_m0 = {:.9} (bound {})\nA_m1 = {:.9} (bound {})\nfinite = {}\ngrowth exponent = {:.4}\n",
        report.side,
        report.q,
        report.a_m0,
        bound(report.closed_form_bound_m0),
        report.a_m1,
        bound(report.closed_form_bound_m1),
        report.finite,
        report.growth_exponent
    );
    Ok(Artifacts { status: ExitStatus::Success, result: serde_json::to_value(&report).expect("serializable"), csv: vec![], summary })
}

#[derive(Clone, Debug, Serialize)]
struct ExtensionRecord {
    n: usize,
    identity_exact: bool,
    support_exact: bool,
    max_ratio: f64,
    max_ratio_refined: f64,
    ratio_change: f64,
    stable: bool,
}

fn run_extend_check(config: &RunConfig) -> Result<Artifacts> {
    let params = config.params();
    let r = params.r_max;
    let l = config.extension.length.unwrap_or(3.0 * r);
    let corpus = interval_corpus(config.seed, config.extension.corpus, r);
    let mut ratios = vec![vec![0.0; corpus.len()]; 2];
    let (mut identity, mut support) = (true, true);
    for (level, n) in [config.grid.n, 2 * config.grid.n].into_iter().enumerate() {
        let grid = Arc::new(build_grid(r, n, SpacingLaw::Uniform)?);
        let row: Vec<Result<(bool, bool, f64)>> = corpus
            .par_iter()
            .map(|f| {
                let u = GridFunction::from_fn(grid.clone(), |x| f.eval(x));
                let t = extend(&u, l)?.function;
                let id = u.values().iter().enumerate().all(|(k, v)| t.values()[k] == *v);
                let sp = t.grid().nodes().iter().zip(t.values()).all(|(x, v)| *x < 2.0 * r || *v == 0.0);
                let ratio = extension_norm(&u, params.m, params.p, params.alpha)?
                    / sobolev_norm(&u, params.m, params.p, params.alpha)?;
                Ok((id, sp, ratio))
            })
            .collect();
        for (k, x) in row.into_iter().enumerate() {
            let (id, sp, ratio) = x?;
            identity &= id;
            support &= sp;
            ratios[level][k] = ratio;
        }
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let (a, b) = (max(&ratios[0]), max(&ratios[1]));
    let change = (b / a - 1.0).abs();
    let rec = ExtensionRecord {
        n: config.grid.n,
        identity_exact: identity,
        support_exact: support,
        max_ratio: a,
        max_ratio_refined: b,
        ratio_change: change,
        stable: change <= 0.05,
    };
    let mut csv = String::from("index,ratio,ratio_refined\n");
    for k in 0..corpus.len() {
        csv += &format!("{k},{:e},{:e}\n", ratios[0][k], ratios[1][k]);
    }
    let ok = rec.identity_exact && rec.support_exact && rec.stable && a.is_finite();
    let summary = format!(
        "Tu = u on (0,R): {}\nsupp Tu ⊆ [0,2R): {}\nmax ‖Tu‖/‖u‖ = {:.6} (n = {}), {:.6} (n = {}), change {:.2e}\n",
        identity, support, a, config.grid.n, b, 2 * config.grid.n, change
    );
    Ok(Artifacts {
        status: if ok { ExitStatus::Success } else { ExitStatus::ChecksFailed },
        result: serde_json::to_value(&rec).expect("serializable"),
        csv: vec![("extension_ratios.csv".into(), csv)],
        summary,
    })
}

fn run_verify(config: &RunConfig) -> Artifacts {
    let checks = verify::run_suite(config.seed);
    let summary: String = checks.iter().map(|c| c.line() + "\n").collect();
    let ok = checks.iter().all(|c| c.passed);
    Artifacts {
        status: if ok { ExitStatus::Success } else { ExitStatus::ChecksFailed },
        result: json!({ "checks": checks }),
        csv: vec![],
        summary,
    }
}

fn status_name(s: ExitStatus) -> serde_json::Value {
    serde_json::to_value(s).expect("serializable")
}

/// Executes `config` and writes `results.json`, the CSV files and `summary.txt` into the
/// configured output directory.
pub fn run(config: &RunConfig) -> RunOutcome {
    if let Err(e) = config.validate() {
        return RunOutcome { status: (&e).into(), files: vec![], summary: e.to_string() + "\n" };
    }
    let artifacts = match config.subcommand {
        Subcommand::Constant => run_constant(config),
        Subcommand::Sweep => run_sweep(config),
        Subcommand::Hardy => run_hardy(config),
        Subcommand::ExtendCheck => run_extend_check(config),
        Subcommand::Verify => Ok(run_verify(config)),
        Subcommand::Regime => Ok(run_regime(config)),
    };
    let artifacts = artifacts.unwrap_or_else(|e| Artifacts {
        status: ExitStatus::of_error(&e),
        result: json!({ "error": e.to_string() }),
        csv: vec![],
        summary: format!("error: {e}\n"),
    });
    let doc = json!({
        "version": VERSION,
        "subcommand": config.subcommand.name(),
        "status": status_name(artifacts.status),
        "config": config,
        "result": artifacts.result,
    });
    let dir = Path::new(&config.output.dir);
    let mut files = Vec::new();
    let mut write = |name: &str, bytes: &[u8]| -> std::io::Result<()> {
        files.push(write_atomic(dir, name, bytes)?);
        Ok(())
    };
    let written = (|| -> std::io::Result<()> {
        if config.output.formats.contains(&Format::Json) {
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            write("results.json", text.as_bytes())?;
        }
        if config.output.formats.contains(&Format::Csv) {
            for (name, body) in &artifacts.csv {
                write(name, body.as_bytes())?;
            }
        }
        let header = format!("radsob {} {}\n", VERSION, config.subcommand.name());
        write("summary.txt", (header + &artifacts.summary).as_bytes())
    })();
    match written {
        Ok(()) => RunOutcome { status: artifacts.status, files, summary: artifacts.summary },
        Err(e) => RunOutcome {
            status: ExitStatus::Io,
            files,
            summary: format!("{}i/o error: {e}\n", artifacts.summary),
        },
    }
}

/// [`run`] inside a thread pool of the given size.
pub fn run_with_threads(config: &RunConfig, threads: Option<usize>) -> RunOutcome {
    match threads {
        None => run(config),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(config)),
            Err(e) => RunOutcome { status: ExitStatus::Config, files: vec![], summary: format!("thread pool: {e}\n") },
        },
    }
}
