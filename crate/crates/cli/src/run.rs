//! Experiment drivers. Each returns the CSV text, the wide plot-data table
//! and the exit code; writing files is left to the caller.

use hetnet_core::analytic::{self, AnalyticOptions, SchemeKind, Target, TargetKind};
use hetnet_core::params::{db_to_linear, linear_to_db};
use hetnet_core::simcore::estimate_cp_batch;
use hetnet_core::Error;

use crate::config::{Experiment, ScenarioConfig, StpSetting};
use crate::output::{fmt_sig, wide, Table};
use crate::CliError;

/// Comparison tolerance floor for compare mode.
pub const COMPARE_ABS_FLOOR: f64 = 0.01;
/// Comparison tolerance in units of the CI half-width.
pub const COMPARE_CI_MULTIPLE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub csv: String,
    pub plot: String,
    /// Human-readable result lines for stdout.
    pub summary: Vec<String>,
    /// Diagnostics for stderr.
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl RunReport {
    fn ok(csv: Table, plot: Table) -> Self {
        RunReport { csv: csv.render(), plot: plot.render(), summary: Vec::new(), warnings: Vec::new(), exit_code: 0 }
    }
}

pub fn run_experiment(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    let mut report = match cfg.experiment {
        Experiment::Curve => run_curve(cfg)?,
        Experiment::Compare => run_compare(cfg)?,
        Experiment::RateSweep => run_rate_sweep(cfg)?,
        Experiment::Threshold => run_threshold(cfg)?,
    };
    if let Some(w) = cfg.params.sparsity_warning() {
        report.warnings.insert(0, w);
    }
    Ok(report)
}

fn options(cfg: &ScenarioConfig) -> AnalyticOptions {
    AnalyticOptions { paper_literal: cfg.paper_literal }
}

fn no_bracket(kind: SchemeKind, e: Error) -> CliError {
    match e {
        Error::NoBracket { target, min, max } => CliError::NoBracket(format!(
            "{} needs a classifier CP of {target:.6}, but the CP only spans [{min:.6}, {max:.6}] for S_tp in [{}, {}] dB",
            kind.label(),
            analytic::STP_BRACKET_DB.0,
            analytic::STP_BRACKET_DB.1,
        )),
        other => CliError::Compute(other),
    }
}

/// Linear `S_tp` for a scheme under the configured setting.
fn s_tp_for(kind: SchemeKind, cfg: &ScenarioConfig) -> Result<f64, CliError> {
    match cfg.s_tp {
        StpSetting::Db(db) => Ok(db_to_linear(db)),
        StpSetting::Auto => {
            analytic::solve_stp(kind, db_to_linear(cfg.s_tm_db), &cfg.params).map_err(|e| no_bracket(kind, e))
        }
    }
}

fn resolve_targets(cfg: &ScenarioConfig) -> Result<Vec<Target>, CliError> {
    let s_tm = db_to_linear(cfg.s_tm_db);
    cfg.targets
        .iter()
        .map(|&kind: &TargetKind| {
            let s_tp = match kind.scheme() {
                Some(k) => s_tp_for(k, cfg)?,
                None => 1.0,
            };
            Ok(kind.with_thresholds(s_tp, s_tm)?)
        })
        .collect()
}

fn run_curve(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    let grid = cfg.t_grid.points();
    let mut triples = Vec::new();
    for target in resolve_targets(cfg)? {
        let c = analytic::curve(&target, &grid, &cfg.params, options(cfg))?;
        triples.extend(c.points.iter().map(|&(x, v)| (target.label().to_string(), x, v)));
    }
    Ok(RunReport::ok(long(&triples), wide("T_dB", &triples)))
}

fn long(triples: &[(String, f64, f64)]) -> Table {
    let mut t = Table::new(&["scheme", "x", "value"]);
    for (s, x, v) in triples {
        t.push(vec![s.clone(), fmt_sig(*x), fmt_sig(*v)]);
    }
    t
}

fn run_compare(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    let grid = cfg.t_grid.points();
    let linear: Vec<f64> = grid.iter().map(|&db| db_to_linear(db)).collect();
    let targets = resolve_targets(cfg)?;
    let mc = estimate_cp_batch(&targets, &linear, &cfg.params, &cfg.mc)?;

    let mut csv = Table::new(&["scheme", "T_dB", "analytic", "mc_mean", "mc_ci", "abs_err"]);
    let mut triples = Vec::new();
    let mut failures = Vec::new();
    for (target, row) in targets.iter().zip(&mc) {
        let label = target.label();
        let c = analytic::curve(target, &grid, &cfg.params, options(cfg))?;
        for (&(db, a), est) in c.points.iter().zip(row) {
            let err = (a - est.mean).abs();
            let tol = (COMPARE_CI_MULTIPLE * est.ci_halfwidth).max(COMPARE_ABS_FLOOR);
            if err > tol {
                failures.push(format!(
                    "{label} at {} dB: |{} - {}| = {} > {}",
                    fmt_sig(db),
                    fmt_sig(a),
                    fmt_sig(est.mean),
                    fmt_sig(err),
                    fmt_sig(tol)
                ));
            }
            csv.push(vec![
                label.to_string(),
                fmt_sig(db),
                fmt_sig(a),
                fmt_sig(est.mean),
                fmt_sig(est.ci_halfwidth),
                fmt_sig(err),
            ]);
            triples.push((format!("{label}_analytic"), db, a));
            triples.push((format!("{label}_mc"), db, est.mean));
        }
    }
    let mut report = RunReport::ok(csv, wide("T_dB", &triples));
    if !failures.is_empty() {
        report.exit_code = 3;
        report.warnings.push(format!("{} point(s) outside tolerance:", failures.len()));
        report.warnings.extend(failures.into_iter().map(|f| format!("  {f}")));
    }
    Ok(report)
}

fn run_rate_sweep(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    let mut triples = Vec::new();
    let mut warnings = Vec::new();
    for kind in [SchemeKind::Ps1, SchemeKind::Ps2] {
        for db in cfg.s_tm_sweep.points() {
            let r = analytic::normalized_rate(kind, db_to_linear(db), &cfg.params)?;
            if r.clamped {
                warnings.push(format!(
                    "{} at S_tm = {} dB: S_tp clamped to {} dB",
                    kind.label(),
                    fmt_sig(db),
                    fmt_sig(linear_to_db(r.s_tp))
                ));
            }
            triples.push((kind.label().to_string(), db, r.normalized));
        }
    }
    let mut report = RunReport::ok(long(&triples), wide("S_tm_dB", &triples));
    report.warnings = warnings;
    Ok(report)
}

fn run_threshold(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    let s_tm = db_to_linear(cfg.s_tm_db);
    let mut triples = Vec::new();
    let mut summary = Vec::new();
    for kind in [SchemeKind::Ps1, SchemeKind::Ps2] {
        let s_tp = analytic::solve_stp(kind, s_tm, &cfg.params).map_err(|e| no_bracket(kind, e))?;
        let db = linear_to_db(s_tp);
        summary.push(format!("{} S_tp = {db:.2} dB (S_tm = {} dB)", kind.label(), fmt_sig(cfg.s_tm_db)));
        triples.push((kind.label().to_string(), cfg.s_tm_db, db));
    }
    let mut report = RunReport::ok(long(&triples), wide("S_tm_dB", &triples));
    report.summary = summary;
    Ok(report)
}
