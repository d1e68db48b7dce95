//! Seeded Monte Carlo oracle for the analytic coverage expressions.
//!
//! Every trial draws its own user and interferer fields from ChaCha8
//! streams indexed by `(trial, field)`, so a trial's outcome depends only on
//! the seed and its index. Fields are generated outward from the user, which
//! makes a larger truncation radius reuse every inner point of a smaller one.
//! Trials run in fixed chunks in parallel and tallies are merged in chunk
//! order, so results do not depend on the worker count.

mod field;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::analytic::{PicoBand, Target};
use crate::error::{domain, Error, Result};
use crate::params::NetworkParams;

pub use field::{
    sample_realization, sample_realization_at, sir_mu, sir_pu, Interferer, MacroBand, Realization,
    SimMode,
};
pub use stats::{proportion_ci, z_for_level};

use stats::MeanAccumulator;

/// One-sigma coverage of a normal interval, the default CI level.
pub const ONE_SIGMA: f64 = 0.682_689_492_137_085_9;

const CHUNK: u64 = 1024;
const STREAMS_PER_TRIAL: u64 = 16;

/// Stream ids inside a trial.
mod stream {
    pub const PU_USER: u64 = 0;
    pub const PU_MACROS_A: u64 = 1;
    pub const PU_PICOS_A: u64 = 2;
    pub const PU_MACROS_B: u64 = 3;
    pub const PU_PICOS_B: u64 = 4;
    pub const MU_USER: u64 = 5;
    pub const MU_MACROS_A: u64 = 6;
    pub const MU_PICOS_A: u64 = 7;
    pub const MU_MACROS_B: u64 = 8;
    pub const MU_PICOS_B: u64 = 9;
    pub const SYNTHETIC: u64 = 10;
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
    /// Outer radius of the sampled fields, m; `None` for `30/√(πλ_m)`.
    pub truncation_radius: Option<f64>,
    /// Coverage of the reported confidence interval.
    pub ci_level: f64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: 100_000,
            seed: 1,
            mode: SimMode::Faithful,
            truncation_radius: None,
            ci_level: ONE_SIGMA,
            workers: None,
        }
    }
}

impl McConfig {
    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_truncation(mut self, radius: f64) -> Self {
        self.truncation_radius = Some(radius);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    /// Smallest admissible truncation radius: the outer edge of the guard
    /// geometry.
    pub fn geometry_bound(p: &NetworkParams) -> f64 {
        p.radius + p.guard_macro.max(p.guard_pico)
    }

    /// Truncation radius in use for `p`.
    pub fn truncation(&self, p: &NetworkParams) -> f64 {
        self.truncation_radius.unwrap_or_else(|| {
            let lambda = if p.lambda_macro > 0.0 { p.lambda_macro } else { p.lambda_pico };
            let bound = Self::geometry_bound(p);
            if lambda > 0.0 {
                (30.0 / (std::f64::consts::PI * lambda).sqrt()).max(2.0 * bound)
            } else {
                2.0 * bound
            }
        })
    }

    pub fn violations(&self, p: &NetworkParams) -> Vec<String> {
        let mut v = Vec::new();
        if self.trials < 1 {
            v.push("trials ≥ 1 required".to_string());
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            v.push("ci_level must lie in (0, 1)".to_string());
        }
        let t = self.truncation(p);
        let bound = Self::geometry_bound(p);
        if !(t > bound) || !t.is_finite() {
            v.push(format!("truncation_radius must exceed the guard geometry ({bound:.1} m)"));
        }
        if self.workers == Some(0) {
            v.push("workers ≥ 1 required".to_string());
        }
        v
    }

    pub fn validate(&self, p: &NetworkParams) -> Result<()> {
        let v = self.violations(p);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    fn z(&self) -> f64 {
        z_for_level(self.ci_level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub ci_halfwidth: f64,
    /// Trials drawn.
    pub trials: u64,
    /// Trials that met the target's classification condition (all of them
    /// for unconditioned targets); the estimate's sample size.
    pub effective: u64,
    pub seed: u64,
}

/// Per-trial result for one target: whether the user belongs to the
/// target's population, and the SIR it is served with.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    condition: bool,
    sir: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    pu_a: bool,
    pu_b: bool,
    mu_a: bool,
    mu_a_picos: bool,
    mu_b: bool,
    mu_b_picos: bool,
}

impl Needs {
    fn of(targets: &[Target], mode: SimMode) -> Needs {
        let mut n = Needs::default();
        for t in targets {
            match t {
                Target::Band(_) => n.pu_a = true,
                Target::Scheme(_) => {
                    n.pu_a = true;
                    n.pu_b = true;
                }
                Target::MuCentreNoPico { .. } => n.mu_a = true,
                Target::MuCentrePs1 { .. } => {
                    n.mu_a = true;
                    n.mu_a_picos = true;
                }
                Target::MuEdgeNoPico { .. } => {
                    n.mu_a = true;
                    n.mu_b = true;
                }
                Target::MuEdgePs2 { .. } => {
                    n.mu_a = true;
                    n.mu_b = true;
                    n.mu_b_picos = true;
                }
            }
        }
        // Physical fallback bands reuse the positions of the primary band.
        if mode == SimMode::Physical && n.mu_b_picos {
            n.mu_a_picos = true;
        }
        n
    }
}

/// Fields of one trial.
struct Trial {
    pu_a: Option<Realization>,
    pu_b: Option<Realization>,
    mu_a: Option<Realization>,
    mu_b: Option<Realization>,
}

struct Sampler<'a> {
    p: &'a NetworkParams,
    mode: SimMode,
    truncation: f64,
    needs: Needs,
    base: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    fn new(p: &'a NetworkParams, cfg: &McConfig, needs: Needs) -> Self {
        Sampler {
            p,
            mode: cfg.mode,
            truncation: cfg.truncation(p),
            needs,
            base: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    fn rng(&self, trial: u64, id: u64) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_stream(trial.wrapping_mul(STREAMS_PER_TRIAL).wrapping_add(id));
        r
    }

    fn trial(&self, index: u64) -> Trial {
        let (p, mode, trunc, n) = (self.p, self.mode, self.truncation, self.needs);
        let mut pu_a = None;
        let mut pu_b = None;
        if n.pu_a {
            let mut user = self.rng(index, stream::PU_USER);
            let r = field::pu_distance(p, &mut user);
            let g_a: f64 = user.sample(Exp1);
            let g_b: f64 = user.sample(Exp1);
            let a = Realization::new(
                r,
                g_a,
                field::pu_macros(p, mode, r, trunc, &mut self.rng(index, stream::PU_MACROS_A)),
                field::pu_picos(p, mode, r, trunc, &mut self.rng(index, stream::PU_PICOS_A)),
            );
            if n.pu_b {
                pu_b = Some(match mode {
                    SimMode::Faithful => Realization::new(
                        r,
                        g_b,
                        field::pu_macros(p, mode, r, trunc, &mut self.rng(index, stream::PU_MACROS_B)),
                        field::pu_picos(p, mode, r, trunc, &mut self.rng(index, stream::PU_PICOS_B)),
                    ),
                    SimMode::Physical => a.refaded(p.alpha, g_b, &mut self.rng(index, stream::PU_MACROS_B)),
                });
            }
            pu_a = Some(a);
        }

        let mut mu_a = None;
        let mut mu_b = None;
        if n.mu_a {
            let mut user = self.rng(index, stream::MU_USER);
            let r = field::mu_distance(p, &mut user);
            let g_a: f64 = user.sample(Exp1);
            let g_b: f64 = user.sample(Exp1);
            let picos_a = if n.mu_a_picos {
                field::mu_picos(p, trunc, &mut self.rng(index, stream::MU_PICOS_A))
            } else {
                Vec::new()
            };
            let a = Realization::new(r, g_a, field::mu_macros(p, r, trunc, &mut self.rng(index, stream::MU_MACROS_A)), picos_a);
            if n.mu_b {
                mu_b = Some(match mode {
                    SimMode::Faithful => {
                        let picos = if n.mu_b_picos {
                            field::mu_picos(p, trunc, &mut self.rng(index, stream::MU_PICOS_B))
                        } else {
                            Vec::new()
                        };
                        Realization::new(r, g_b, field::mu_macros(p, r, trunc, &mut self.rng(index, stream::MU_MACROS_B)), picos)
                    }
                    SimMode::Physical => a.refaded(p.alpha, g_b, &mut self.rng(index, stream::MU_MACROS_B)),
                });
            }
            mu_a = Some(a);
        }
        Trial { pu_a, pu_b, mu_a, mu_b }
    }

    fn outcome(&self, trial: &Trial, target: &Target) -> Result<Outcome> {
        let (p, mode) = (self.p, self.mode);
        let missing = || domain("trial is missing a field its target needs");
        let pu_a = || trial.pu_a.as_ref().ok_or_else(missing);
        let pu_b = || trial.pu_b.as_ref().ok_or_else(missing);
        let mu_a = || trial.mu_a.as_ref().ok_or_else(missing);
        let mu_b = || trial.mu_b.as_ref().ok_or_else(missing);
        let all = |sir| Ok(Outcome { condition: true, sir });
        match *target {
            Target::Band(b) => all(sir_pu(pu_a()?, b, p, mode)?),
            Target::Scheme(s) => {
                let centre = sir_pu(pu_a()?, s.kind.centre_band(), p, mode)?;
                if centre > s.s_tp {
                    all(centre)
                } else {
                    all(sir_pu(pu_b()?, PicoBand::FfrNeighbourEdge, p, mode)?)
                }
            }
            Target::MuEdgeNoPico { s_tm } | Target::MuEdgePs2 { s_tm } => {
                let picos = matches!(target, Target::MuEdgePs2 { .. });
                let centre = sir_mu(mu_a()?, MacroBand::Centre { picos: false }, p)?;
                Ok(Outcome {
                    condition: centre < s_tm,
                    sir: sir_mu(mu_b()?, MacroBand::Edge { picos }, p)?,
                })
            }
            Target::MuCentreNoPico { s_tm } | Target::MuCentrePs1 { s_tm } => {
                let picos = matches!(target, Target::MuCentrePs1 { .. });
                let sir = sir_mu(mu_a()?, MacroBand::Centre { picos }, p)?;
                Ok(Outcome { condition: sir > s_tm, sir })
            }
        }
    }
}

fn check_targets(targets: &[Target], p: &NetworkParams) -> Result<()> {
    for t in targets {
        if t.is_macro_user() && !(p.lambda_macro > 0.0) {
            return Err(domain("macro-user targets need a macro tier (λ_m > 0)"));
        }
        if let Target::Scheme(s) = t {
            if !(s.s_tp > 0.0) {
                return Err(domain("S_tp must be > 0"));
            }
        }
    }
    Ok(())
}

fn run_chunks<T, F>(cfg: &McConfig, per_chunk: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    let chunks = cfg.trials.div_ceil(CHUNK);
    let work = || -> Result<Vec<T>> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                per_chunk(start, (start + CHUNK).min(cfg.trials))
            })
            .collect()
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| domain(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

#[derive(Debug, Clone)]
struct Tally {
    condition: Vec<u64>,
    infinite: Vec<u64>,
    /// `hits[target * thresholds + k]`.
    hits: Vec<u64>,
}

impl Tally {
    fn new(targets: usize, thresholds: usize) -> Self {
        Tally {
            condition: vec![0; targets],
            infinite: vec![0; targets],
            hits: vec![0; targets * thresholds],
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.condition.iter_mut().zip(&other.condition) {
            *a += b;
        }
        for (a, b) in self.infinite.iter_mut().zip(&other.infinite) {
            *a += b;
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
    }
}

/// Coverage estimates for every target at every linear threshold, from one
/// set of trials: `result[target][threshold]`.
pub fn estimate_cp_batch(targets: &[Target], thresholds: &[f64], p: &NetworkParams, cfg: &McConfig) -> Result<Vec<Vec<McEstimate>>> {
    p.validate()?;
    cfg.validate(p)?;
    check_targets(targets, p)?;
    if thresholds.iter().any(|t| !(*t >= 0.0)) {
        return Err(domain("thresholds must be ≥ 0"));
    }
    let sampler = Sampler::new(p, cfg, Needs::of(targets, cfg.mode));
    let nt = thresholds.len();
    let tallies = run_chunks(cfg, |start, end| {
        let mut tally = Tally::new(targets.len(), nt);
        for i in start..end {
            let trial = sampler.trial(i);
            for (j, target) in targets.iter().enumerate() {
                let o = sampler.outcome(&trial, target)?;
                if !o.condition {
                    continue;
                }
                tally.condition[j] += 1;
                if o.sir == f64::INFINITY {
                    tally.infinite[j] += 1;
                }
                for (k, &t) in thresholds.iter().enumerate() {
                    if o.sir > t {
                        tally.hits[j * nt + k] += 1;
                    }
                }
            }
        }
        Ok(tally)
    })?;
    let mut total = Tally::new(targets.len(), nt);
    for t in &tallies {
        total.merge(t);
    }

    let z = cfg.z();
    let mut out = Vec::with_capacity(targets.len());
    for (j, target) in targets.iter().enumerate() {
        let n = total.condition[j];
        if n == 0 {
            return Err(domain(format!(
                "no trial met the condition of target '{}'",
                target.label()
            )));
        }
        let row = (0..nt)
            .map(|k| {
                let hits = total.hits[j * nt + k];
                let (mean, ci) = if total.infinite[j] == n {
                    (1.0, 0.0)
                } else {
                    proportion_ci(hits, n, z)
                };
                McEstimate {
                    mean,
                    ci_halfwidth: ci,
                    trials: cfg.trials,
                    effective: n,
                    seed: cfg.seed,
                }
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Empirical `P[SIR > t]` for one target.
pub fn estimate_cp(target: &Target, t: f64, p: &NetworkParams, cfg: &McConfig) -> Result<McEstimate> {
    Ok(estimate_cp_batch(std::slice::from_ref(target), &[t], p, cfg)?[0][0])
}

/// Sample mean of `ln(1 + SIR)` over the target's population.
pub fn estimate_rate(target: &Target, p: &NetworkParams, cfg: &McConfig) -> Result<McEstimate> {
    p.validate()?;
    cfg.validate(p)?;
    let targets = std::slice::from_ref(target);
    check_targets(targets, p)?;
    let sampler = Sampler::new(p, cfg, Needs::of(targets, cfg.mode));
    let accs = run_chunks(cfg, |start, end| {
        let mut acc = MeanAccumulator::default();
        for i in start..end {
            let o = sampler.outcome(&sampler.trial(i), target)?;
            if !o.condition {
                continue;
            }
            if o.sir == f64::INFINITY {
                return Err(Error::RateDivergence(format!(
                    "trial {i} drew no interferers, so its rate is infinite; use nonzero BS densities"
                )));
            }
            acc.push(o.sir.ln_1p());
        }
        Ok(acc)
    })?;
    finish_mean(accs, cfg)
}

/// As [`estimate_rate`] with the SIR of each trial drawn by `sir` from the
/// trial's own generator instead of the spatial model.
pub fn estimate_rate_with<F>(sir: F, cfg: &McConfig) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if cfg.trials < 1 || !(cfg.ci_level > 0.0 && cfg.ci_level < 1.0) {
        return Err(domain("trials ≥ 1 and ci_level in (0, 1) required"));
    }
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let accs = run_chunks(cfg, |start, end| {
        let mut acc = MeanAccumulator::default();
        for i in start..end {
            let mut rng = base.clone();
            rng.set_stream(i.wrapping_mul(STREAMS_PER_TRIAL).wrapping_add(stream::SYNTHETIC));
            let x = sir(&mut rng);
            if x == f64::INFINITY {
                return Err(Error::RateDivergence(format!("trial {i} has infinite SIR")));
            }
            acc.push(x.ln_1p());
        }
        Ok(acc)
    })?;
    finish_mean(accs, cfg)
}

fn finish_mean(accs: Vec<MeanAccumulator>, cfg: &McConfig) -> Result<McEstimate> {
    let mut total = MeanAccumulator::default();
    for a in &accs {
        total.merge(a);
    }
    if total.count == 0 {
        return Err(domain("no trial met the target's condition"));
    }
    Ok(McEstimate {
        mean: total.mean(),
        ci_halfwidth: cfg.z() * total.standard_error(),
        trials: cfg.trials,
        effective: total.count,
        seed: cfg.seed,
    })
}
