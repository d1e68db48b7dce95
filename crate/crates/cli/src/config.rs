//! Flat `key = value` scenario files.
//!
//! Sections (`[network]`, `[mc]`, …) are accepted for readability but keys
//! are global. Powers are in dBm, densities per km², distances in metres and
//! thresholds in dB; everything is converted to SI/linear here, once.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use hetnet_core::analytic::{db_grid, SchemeKind, TargetKind};
use hetnet_core::params::{dbm_to_watts, per_km2_to_per_m2, NetworkParams};
use hetnet_core::simcore::{McConfig, SimMode, ONE_SIGMA};

use crate::CliError;

/// Default scenario: the reference FFR deployment with the three pico bands.
pub const DEFAULT_TARGETS: &str = "ffr-centre,ffr-edge,ffr-neighbour-edge";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Curve,
    Compare,
    RateSweep,
    Threshold,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Curve => "curve",
            Experiment::Compare => "compare",
            Experiment::RateSweep => "rate-sweep",
            Experiment::Threshold => "threshold",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "curve" => Ok(Experiment::Curve),
            "compare" => Ok(Experiment::Compare),
            "rate-sweep" => Ok(Experiment::RateSweep),
            "threshold" => Ok(Experiment::Threshold),
            other => Err(format!("unknown experiment '{other}'")),
        }
    }
}

/// Pico classification threshold: fixed, or solved from `S_tm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StpSetting {
    Auto,
    Db(f64),
}

/// A dB grid given by its end points and step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbRange {
    pub fn points(&self) -> Vec<f64> {
        db_grid(self.start, self.stop, self.step).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: NetworkParams,
    pub experiment: Experiment,
    pub targets: Vec<TargetKind>,
    pub t_grid: DbRange,
    pub s_tm_db: f64,
    pub s_tp: StpSetting,
    pub s_tm_sweep: DbRange,
    pub mc: McConfig,
    pub output: Option<PathBuf>,
    pub paper_literal: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            params: NetworkParams::default(),
            experiment: Experiment::Curve,
            targets: parse_targets(DEFAULT_TARGETS).expect("default targets parse"),
            t_grid: DbRange { start: -10.0, stop: 20.0, step: 1.0 },
            s_tm_db: 0.0,
            s_tp: StpSetting::Auto,
            s_tm_sweep: DbRange { start: -5.0, stop: 15.0, step: 2.0 },
            mc: McConfig {
                trials: 100_000,
                seed: 1,
                mode: SimMode::Faithful,
                truncation_radius: None,
                ci_level: ONE_SIGMA,
                workers: None,
            },
            output: None,
            paper_literal: false,
        }
    }
}

impl ScenarioConfig {
    /// Schemes among the targets, or both when none is listed.
    pub fn schemes(&self) -> Vec<SchemeKind> {
        let mut v: Vec<SchemeKind> = self.targets.iter().filter_map(|t| t.scheme()).collect();
        v.dedup();
        if v.is_empty() {
            v = vec![SchemeKind::Ps1, SchemeKind::Ps2];
        }
        v
    }
}

fn parse_targets(s: &str) -> Result<Vec<TargetKind>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<TargetKind>().map_err(|e| e.to_string()))
        .collect()
}

/// Raw `key -> (value, line)` assignments; later ones win.
#[derive(Debug, Clone, Default)]
pub struct Assignments {
    entries: BTreeMap<String, (String, usize)>,
}

const KEYS: &[&str] = &[
    "p_m_dbm",
    "p_p_dbm",
    "lambda_m_km2",
    "lambda_p_km2",
    "alpha",
    "delta",
    "beta",
    "radius",
    "guard_p",
    "guard_m",
    "experiment",
    "target",
    "t_start_db",
    "t_stop_db",
    "t_step_db",
    "s_tm_db",
    "s_tp_db",
    "s_tm_start_db",
    "s_tm_stop_db",
    "s_tm_step_db",
    "trials",
    "seed",
    "mode",
    "truncation_radius",
    "ci_level",
    "workers",
    "output",
];

impl Assignments {
    /// Parses config text. Syntax errors carry their 1-based line number.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut a = Assignments::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(CliError::Parse { line: line_no, msg: format!("malformed section header '{line}'") });
                }
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Parse { line: line_no, msg: format!("expected 'key = value', got '{line}'") });
            };
            a.set(k.trim(), v.trim(), line_no)?;
        }
        Ok(a)
    }

    /// Sets one key; `line` 0 marks command-line overrides.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        let key = key.to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            let msg = format!("unknown key '{key}'");
            return Err(if line == 0 { CliError::Invalid(vec![msg]) } else { CliError::Parse { line, msg } });
        }
        let value = value.trim_matches('"').to_string();
        self.entries.insert(key, (value, line));
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let Some((k, v)) = spec.split_once('=') else {
            return Err(CliError::Invalid(vec![format!("override '{spec}' is not key=value")]));
        };
        self.set(k.trim(), v.trim(), 0)
    }

    fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.entries.get(key)
    }

    /// Builds and validates the scenario, reporting every problem at once.
    pub fn build(&self) -> Result<ScenarioConfig, CliError> {
        let mut errs = Vec::new();
        let mut cfg = ScenarioConfig::default();

        let num = |key: &str, errs: &mut Vec<String>| -> Option<f64> {
            let (v, line) = self.get(key)?;
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some(x),
                _ => {
                    errs.push(format!("{}: {key} must be a finite number, got '{v}'", where_(*line)));
                    None
                }
            }
        };

        let d = NetworkParams::default();
        let p_m = num("p_m_dbm", &mut errs).map_or(d.p_macro, dbm_to_watts);
        let p_p = num("p_p_dbm", &mut errs).map_or(d.p_pico, dbm_to_watts);
        let lm = num("lambda_m_km2", &mut errs).map_or(d.lambda_macro, per_km2_to_per_m2);
        let lp = num("lambda_p_km2", &mut errs).map_or(d.lambda_pico, per_km2_to_per_m2);
        let alpha = num("alpha", &mut errs).unwrap_or(d.alpha);
        let beta = num("beta", &mut errs).unwrap_or(d.beta);
        let radius = num("radius", &mut errs).unwrap_or(d.radius);
        let delta = match num("delta", &mut errs) {
            Some(x) if x >= 1.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) => x as u32,
            Some(x) => {
                errs.push(format!("δ ≥ 1 required (integer), got {x}"));
                d.delta
            }
            None => d.delta,
        };
        let mut params = NetworkParams::new(p_m, p_p, lm, lp, alpha, delta, beta, radius);
        if let Some(g) = num("guard_p", &mut errs) {
            params.guard_pico = g;
        }
        if let Some(g) = num("guard_m", &mut errs) {
            params.guard_macro = g;
        }
        errs.extend(params.violations());
        cfg.params = params;

        if let Some((v, line)) = self.get("experiment") {
            match v.parse() {
                Ok(e) => cfg.experiment = e,
                Err(e) => errs.push(format!("{}: {e}", where_(*line))),
            }
        }
        if let Some((v, line)) = self.get("target") {
            match parse_targets(v) {
                Ok(t) if !t.is_empty() => cfg.targets = t,
                Ok(_) => errs.push(format!("{}: target list is empty", where_(*line))),
                Err(e) => errs.push(format!("{}: {e}", where_(*line))),
            }
        }

        let t = &mut cfg.t_grid;
        t.start = num("t_start_db", &mut errs).unwrap_or(t.start);
        t.stop = num("t_stop_db", &mut errs).unwrap_or(t.stop);
        t.step = num("t_step_db", &mut errs).unwrap_or(t.step);
        check_range("T grid", t, &mut errs);
        let s = &mut cfg.s_tm_sweep;
        s.start = num("s_tm_start_db", &mut errs).unwrap_or(s.start);
        s.stop = num("s_tm_stop_db", &mut errs).unwrap_or(s.stop);
        s.step = num("s_tm_step_db", &mut errs).unwrap_or(s.step);
        check_range("S_tm sweep", s, &mut errs);
        cfg.s_tm_db = num("s_tm_db", &mut errs).unwrap_or(cfg.s_tm_db);

        if let Some((v, line)) = self.get("s_tp_db") {
            if v.eq_ignore_ascii_case("auto") {
                cfg.s_tp = StpSetting::Auto;
            } else {
                match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => cfg.s_tp = StpSetting::Db(x),
                    _ => errs.push(format!("{}: s_tp_db must be a number or 'auto', got '{v}'", where_(*line))),
                }
            }
        }

        let int = |key: &str, errs: &mut Vec<String>| -> Option<u64> {
            let (v, line) = self.get(key)?;
            // Accept 1e6 style as well as plain integers.
            let parsed = v.parse::<u64>().ok().or_else(|| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| *x >= 0.0 && x.fract() == 0.0 && *x < 1.8e19)
                    .map(|x| x as u64)
            });
            if parsed.is_none() {
                errs.push(format!("{}: {key} must be a nonnegative integer, got '{v}'", where_(*line)));
            }
            parsed
        };
        if let Some(n) = int("trials", &mut errs) {
            cfg.mc.trials = n;
        }
        if let Some(n) = int("seed", &mut errs) {
            cfg.mc.seed = n;
        }
        if let Some(n) = int("workers", &mut errs) {
            cfg.mc.workers = Some(n as usize);
        }
        if let Some((v, line)) = self.get("mode") {
            match v.as_str() {
                "faithful" => cfg.mc.mode = SimMode::Faithful,
                "physical" => cfg.mc.mode = SimMode::Physical,
                other => errs.push(format!("{}: mode must be 'faithful' or 'physical', got '{other}'", where_(*line))),
            }
        }
        cfg.mc.truncation_radius = num("truncation_radius", &mut errs).or(cfg.mc.truncation_radius);
        cfg.mc.ci_level = num("ci_level", &mut errs).unwrap_or(cfg.mc.ci_level);
        if cfg.params.validate().is_ok() {
            errs.extend(cfg.mc.violations(&cfg.params));
        }
        if let Some((v, _)) = self.get("output") {
            if !v.is_empty() {
                cfg.output = Some(PathBuf::from(v));
            }
        }

        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Invalid(errs))
        }
    }
}

fn where_(line: usize) -> String {
    if line == 0 {
        "override".to_string()
    } else {
        format!("line {line}")
    }
}

fn check_range(name: &str, r: &DbRange, errs: &mut Vec<String>) {
    if !(r.step > 0.0) {
        errs.push(format!("{name}: step must be > 0"));
    } else if !(r.stop >= r.start) {
        errs.push(format!("{name}: stop must be ≥ start"));
    } else if (r.stop - r.start) / r.step > 1e5 {
        errs.push(format!("{name}: more than 100000 points"));
    }
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    Assignments::parse(text)?.build()
}
