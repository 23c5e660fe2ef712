//! Run orchestration: scale factor, operators, evolution, analysis and artifacts.
//!
//! Each run writes three files into its output directory:
//!
//! * `timeseries.csv` with columns `t, a, a_gamma, y_0 .. y_m, script_E_m,
//!   drift_0 .. drift_4, min_F, l2_norm`, where `y_s = Σ_{k<=s} |||f|||²_k`,
//!   `drift_i` is the change of the i-th invariant moment since `t = 0` and
//!   `min_F = min_v (μ + √μ f)`. Every number carries 17 significant digits.
//! * `report.json`, which depends only on the configuration and is therefore
//!   bitwise reproducible.
//! * `timings.json` with wall-clock phase timings.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{probe_operator_bounds, CollisionOperatorSet, ProbeReport, ProbeSettings, DEFAULT_NODE_BUDGET};
use crate::config::RunConfig;
use crate::decay::{classify_regime, predicted_exponent, verdict, DecayVerdict, RegimeTag, MONOTONE_SLACK, REGIME_TOL};
use crate::error::{Error, Result};
use crate::evolution::{monitor, AbortInfo, Evolution, MonitorSummary, TrajectoryRecord, POSITIVITY_TOL};
use crate::fields::initial_data;
use crate::norms::INTERPOLATION_SLACK;
use crate::scale_factor::solve_scale_factor;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERDICT_FAIL: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

/// Exit code for an error raised before or during a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::RegimeMismatch(_)
        | Error::GridMismatch(_)
        | Error::StencilExceedsGrid { .. }
        | Error::MemoryBudget { .. }
        | Error::Format(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::TimeOutOfRange { .. } => EXIT_CONFIG,
        Error::NumericalAbort { .. } | Error::Degenerate(_) | Error::InsufficientData(_) => EXIT_ABORT,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub regime_tol: f64,
    pub monotone_slack: f64,
    pub positivity_tol: f64,
    pub interpolation_slack: f64,
    pub small_data_threshold: f64,
    pub blowup_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactorSummary {
    pub adot0: f64,
    pub e_a: f64,
    pub max_energy_drift: f64,
    pub a_end: f64,
    pub a_gamma_integral_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub nodes: usize,
    pub sphere_pairs: usize,
    pub nu_max: f64,
    /// Relative asymmetry of the assembled `K` matrix, when assembled.
    pub k_asymmetry: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub crate_version: String,
    pub config: RunConfig,
    pub regime: RegimeTag,
    pub scale_factor: ScaleFactorSummary,
    pub operators: OperatorSummary,
    pub initial_script_e_m: f64,
    pub steps: usize,
    pub samples: usize,
    pub monitor: MonitorSummary,
    pub verdict: Option<DecayVerdict>,
    /// Why no verdict was produced, when none was.
    pub verdict_note: Option<String>,
    pub probe: Option<ProbeReport>,
    pub abort: Option<AbortInfo>,
    pub tolerances: Tolerances,
    pub status: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// Seconds per phase, keyed by phase name.
    pub phases: BTreeMap<String, f64>,
    pub total: f64,
    pub time_budget_s: Option<f64>,
    pub within_budget: Option<bool>,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Timings,
    pub record: TrajectoryRecord,
    pub out_dir: PathBuf,
}

struct Clock {
    start: Instant,
    last: Instant,
    phases: BTreeMap<String, f64>,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Clock { start: now, last: now, phases: BTreeMap::new() }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.phases.insert(name.to_string(), (now - self.last).as_secs_f64());
        self.last = now;
    }

    fn finish(self, budget: Option<f64>) -> Timings {
        let total = self.start.elapsed().as_secs_f64();
        Timings {
            phases: self.phases,
            total,
            time_budget_s: budget,
            within_budget: budget.map(|b| total <= b),
            threads: rayon::current_num_threads(),
        }
    }
}

/// Output directory: explicit override, then the config's `out_dir`, then `out/<name>`.
pub fn resolve_out_dir(cfg: &RunConfig, out: Option<&Path>) -> PathBuf {
    match (out, &cfg.out_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => Path::new("out").join(&cfg.name),
    }
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    Tolerances {
        regime_tol: REGIME_TOL,
        monotone_slack: MONOTONE_SLACK,
        positivity_tol: POSITIVITY_TOL,
        interpolation_slack: INTERPOLATION_SLACK,
        small_data_threshold: cfg.evolution.small_data_threshold,
        blowup_factor: cfg.evolution.blowup_factor,
    }
}

fn probe_settings(cfg: &RunConfig) -> Option<ProbeSettings> {
    cfg.probe.as_ref().map(|p| ProbeSettings {
        samples: p.samples,
        theta_list: p.theta_list.clone(),
        k_list: p.k_list.clone(),
        n_der: p.n_der,
        seed: cfg.seed,
    })
}

/// Builds the operator set for a config, assembling `K` when it fits the budget.
pub fn build_operators(cfg: &RunConfig) -> Result<CollisionOperatorSet> {
    let grid = cfg.grid()?;
    let mut ops = CollisionOperatorSet::new(grid, cfg.physics.gamma, cfg.kernel()?, cfg.treatment(), &cfg.sphere()?)?;
    if grid.len() <= DEFAULT_NODE_BUDGET {
        ops.assemble(DEFAULT_NODE_BUDGET)?;
    }
    Ok(ops)
}

/// Executes a validated config without writing artifacts.
pub fn execute(cfg: &RunConfig) -> Result<(RunReport, Timings, TrajectoryRecord)> {
    cfg.validate()?;
    let mut clock = Clock::new();
    let adot0 = cfg.adot0()?;
    let e_a = cfg.e_a()?;
    let regime = classify_regime(e_a, cfg.physics.gamma)?;
    let traj = solve_scale_factor(adot0, cfg.physics.gamma, cfg.evolution.t_end, cfg.analysis.scale_factor_dt)?;
    let t_end = traj.t_end();
    let scale_factor = ScaleFactorSummary {
        adot0,
        e_a,
        max_energy_drift: traj.max_energy_drift(),
        a_end: traj.a_at(t_end)?,
        a_gamma_integral_end: traj.a_gamma_integral(t_end)?,
    };
    clock.lap("scale_factor");

    let ops = build_operators(cfg)?;
    let operators = OperatorSummary {
        nodes: ops.grid().len(),
        sphere_pairs: ops.geom.omega.len(),
        nu_max: ops.nu_max(),
        k_asymmetry: ops.k_matrix.as_ref().map(|m| m.asymmetry),
    };
    clock.lap("assembly");

    let probe = match probe_settings(cfg) {
        Some(s) => Some(probe_operator_bounds(&ops, &s)?),
        None => None,
    };
    clock.lap("probe");

    let f0 = initial_data(&cfg.initial, ops.grid())?;
    let norms = cfg.norm_config()?;
    let record = Evolution::new(&ops, &traj)?.evolve(&f0, &cfg.evolution_config(), &norms)?;
    clock.lap("evolution");

    let summary = monitor(&record)?;
    let (verdict_result, mut verdict_note) = if record.abort.is_some() {
        (None, Some("run aborted".to_string()))
    } else if !cfg.analysis.decay_verdict {
        (None, Some("decay verdict disabled".to_string()))
    } else if regime == RegimeTag::Uncovered {
        (None, Some("parameters lie outside the covered regimes".to_string()))
    } else {
        match verdict(&record, regime, cfg.norms.r, cfg.norms.k, cfg.analysis.window, cfg.analysis.t_min) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    clock.lap("analysis");

    let drift_exceeded = cfg.analysis.max_moment_drift.is_some_and(|d| summary.max_moment_drift > d);
    let (status, exit_code) = if record.abort.is_some() {
        ("abort", EXIT_ABORT)
    } else if drift_exceeded {
        verdict_note = Some(format!("moment drift {:e} exceeds the allowed drift", summary.max_moment_drift));
        ("verdict_fail", EXIT_VERDICT_FAIL)
    } else if let Some(tol) =
        cfg.analysis.max_dissipation_residual.filter(|&tol| summary.max_relative_dissipation_residual > tol)
    {
        verdict_note = Some(format!(
            "relative dissipation residual {:e} exceeds {tol:e}",
            summary.max_relative_dissipation_residual
        ));
        ("verdict_fail", EXIT_VERDICT_FAIL)
    } else if !cfg.analysis.decay_verdict {
        ("no_verdict", EXIT_PASS)
    } else {
        match (&verdict_result, regime) {
            (Some(v), _) if v.pass => ("pass", EXIT_PASS),
            (Some(_), _) => ("verdict_fail", EXIT_VERDICT_FAIL),
            (None, RegimeTag::Uncovered) => ("uncovered", EXIT_PASS),
            (None, _) => ("verdict_fail", EXIT_VERDICT_FAIL),
        }
    };
    if exit_code == EXIT_VERDICT_FAIL && verdict_note.is_none() {
        verdict_note = Some("envelope ratio rises over the tail".to_string());
    }
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        regime,
        scale_factor,
        operators,
        initial_script_e_m: record.energy[0].script_e_m,
        steps: record.steps,
        samples: record.times.len(),
        monitor: summary,
        verdict: verdict_result,
        verdict_note,
        probe,
        abort: record.abort.clone(),
        tolerances: tolerances(cfg),
        status: status.to_string(),
        exit_code,
    };
    Ok((report, clock.finish(cfg.time_budget_s), record))
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the time series in the documented column order.
pub fn write_timeseries<W: Write>(record: &TrajectoryRecord, mut out: W) -> Result<()> {
    let m = record.norm_config.m;
    let mut header = vec!["t".to_string(), "a".into(), "a_gamma".into()];
    header.extend((0..=m).map(|s| format!("y_{s}")));
    header.push("script_E_m".into());
    header.extend((0..5).map(|i| format!("drift_{i}")));
    header.push("min_F".into());
    header.push("l2_norm".into());
    writeln!(out, "{}", header.join(","))?;
    let m0 = record.moments.first().copied().unwrap_or([0.0; 5]);
    for i in 0..record.times.len() {
        let e = &record.energy[i];
        let mut row = vec![sci(record.times[i]), sci(record.a[i]), sci(record.a_gamma[i])];
        row.extend((0..=m).map(|s| sci(e.y(s))));
        row.push(sci(e.script_e_m));
        row.extend((0..5).map(|q| sci(record.moments[i][q] - m0[q])));
        row.push(sci(record.min_density[i]));
        row.push(sci(record.l2_norm[i]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs a config and writes its artifacts into `out_dir`.
pub fn run_to_dir(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    let (report, timings, record) = execute(cfg)?;
    fs::create_dir_all(out_dir)?;
    let mut csv = Vec::new();
    write_timeseries(&record, &mut csv)?;
    fs::write(out_dir.join("timeseries.csv"), csv)?;
    write_json(&out_dir.join("report.json"), &report)?;
    write_json(&out_dir.join("timings.json"), &timings)?;
    Ok(RunOutcome { report, timings, record, out_dir: out_dir.to_path_buf() })
}

/// One entry of a sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub name: String,
    pub gamma: f64,
    pub e_a: f64,
    pub k: u32,
    pub n_per_axis: usize,
    pub regime: Option<RegimeTag>,
    pub exit_code: i32,
    pub status: String,
    pub exponent_predicted: Option<f64>,
    pub exponent_fitted: Option<f64>,
    pub pass: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub runs: Vec<SweepEntry>,
    pub exit_code: i32,
}

fn sweep_entry(cfg: &RunConfig, dir: &Path) -> SweepEntry {
    let e_a = cfg.e_a().unwrap_or(f64::NAN);
    let regime = classify_regime(e_a, cfg.physics.gamma).ok();
    let mut entry = SweepEntry {
        name: cfg.name.clone(),
        gamma: cfg.physics.gamma,
        e_a,
        k: cfg.norms.k,
        n_per_axis: cfg.grid.n_per_axis,
        regime,
        exit_code: EXIT_CONFIG,
        status: "error".into(),
        exponent_predicted: regime.and_then(|r| predicted_exponent(r, cfg.norms.k, cfg.physics.gamma).ok()),
        exponent_fitted: None,
        pass: None,
        error: None,
    };
    match run_to_dir(cfg, dir) {
        Ok(o) => {
            entry.exit_code = o.report.exit_code;
            entry.status = o.report.status.clone();
            if let Some(v) = &o.report.verdict {
                entry.exponent_fitted = v.exponent_fitted;
                entry.pass = Some(v.pass);
            }
        }
        Err(e) => {
            entry.exit_code = exit_code_for(&e);
            entry.status = if entry.exit_code == EXIT_ABORT { "abort".into() } else { "error".into() };
            entry.error = Some(e.to_string());
        }
    }
    entry
}

/// Runs a list of configs concurrently, one subdirectory each, and writes
/// `summary.json` and `exponents.csv`. The summary exit code is the worst child code.
pub fn sweep_configs(configs: &[RunConfig], out_dir: &Path) -> Result<SweepSummary> {
    if configs.is_empty() {
        return Err(Error::Config("sweep has no runs".into()));
    }
    fs::create_dir_all(out_dir)?;
    let runs: Vec<SweepEntry> = configs.par_iter().map(|c| sweep_entry(c, &out_dir.join(&c.name))).collect();
    let exit_code = runs.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_PASS);
    let summary = SweepSummary { schema_version: SCHEMA_VERSION, runs, exit_code };
    write_json(&out_dir.join("summary.json"), &summary)?;
    let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
    let mut csv = String::from("name,gamma,e_a,k,n_per_axis,regime,exponent_predicted,exponent_fitted,exit_code\n");
    for r in &summary.runs {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.name,
            sci(r.gamma),
            sci(r.e_a),
            r.k,
            r.n_per_axis,
            r.regime.map(|g| g.name()).unwrap_or(""),
            opt(r.exponent_predicted),
            opt(r.exponent_fitted),
            r.exit_code
        ));
    }
    fs::write(out_dir.join("exponents.csv"), csv)?;
    Ok(summary)
}

/// Expands the config's sweep lists and runs them.
pub fn sweep(cfg: &RunConfig, out_dir: &Path) -> Result<SweepSummary> {
    sweep_configs(&cfg.expand_sweep()?, out_dir)
}

/// Operator-bound probes only; writes `probe.json`.
pub fn probe(cfg: &RunConfig, out_dir: &Path) -> Result<ProbeReport> {
    cfg.validate()?;
    let ops = build_operators(cfg)?;
    let settings = probe_settings(cfg).unwrap_or(ProbeSettings { seed: cfg.seed, ..ProbeSettings::default() });
    let report = probe_operator_bounds(&ops, &settings)?;
    fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("probe.json"), &report)?;
    Ok(report)
}
