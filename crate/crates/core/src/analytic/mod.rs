//! Analytical coverage probability and rate expressions.
//!
//! Pico-user results average a per-distance success probability over the
//! uniform user density `2r/R²` on the picocell; macro-user results average
//! over the Rayleigh nearest-BS distance `2πλ_m r e^{-πλ_m r²}`.

mod macro_user;
mod pico;
mod rate;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::params::{db_to_linear, NetworkParams};

pub use macro_user::{
    cp_mu_centre_nopico, cp_mu_centre_ps1, cp_mu_edge_nopico, cp_mu_edge_nopico_integral,
    cp_mu_edge_ps2,
};
pub use pico::{
    cp_ffr_centre, cp_ffr_edge, cp_ffr_neighbour_edge, cp_ps1, cp_ps2, cp_sfr_centre,
    cp_sfr_edge, PicoKernels,
};
pub use rate::{
    avg_rate, band_allocation, normalized_rate, solve_stp, solve_stp_for_target,
    BandAllocation, NormalizedRate, STP_BRACKET_DB,
};

/// Frequency resource a pico user is served on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PicoBand {
    /// FFR centre band F0, shared with every macro.
    FfrCentre,
    /// The reference macrocell's own FFR edge band F1.
    FfrEdge,
    /// A neighbouring cell's FFR edge band (F2 or F3).
    FfrNeighbourEdge,
    /// SFR centre band of the reference cell.
    SfrCentre,
    /// SFR edge band of the reference cell, where its macro transmits at βP_m.
    SfrEdge,
    /// No coordination: same interference environment as [`PicoBand::FfrCentre`].
    Conventional,
}

impl PicoBand {
    pub const ALL: [PicoBand; 6] = [
        PicoBand::FfrCentre,
        PicoBand::FfrEdge,
        PicoBand::FfrNeighbourEdge,
        PicoBand::SfrCentre,
        PicoBand::SfrEdge,
        PicoBand::Conventional,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PicoBand::FfrCentre => "ffr-centre",
            PicoBand::FfrEdge => "ffr-edge",
            PicoBand::FfrNeighbourEdge => "ffr-neighbour-edge",
            PicoBand::SfrCentre => "sfr-centre",
            PicoBand::SfrEdge => "sfr-edge",
            PicoBand::Conventional => "conventional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Centre pico users on F0, edge pico users on neighbouring edge bands.
    Ps1,
    /// Centre pico users on the own-cell edge band F1, edge pico users on
    /// neighbouring edge bands.
    Ps2,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Ps1 => "ps1",
            SchemeKind::Ps2 => "ps2",
        }
    }

    /// Band the cell-centre pico users are served on (and classified by).
    pub fn centre_band(self) -> PicoBand {
        match self {
            SchemeKind::Ps1 => PicoBand::FfrCentre,
            SchemeKind::Ps2 => PicoBand::FfrEdge,
        }
    }
}

/// A pico allocation scheme with its classification threshold `S_tp` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicoScheme {
    pub kind: SchemeKind,
    pub s_tp: f64,
}

impl PicoScheme {
    pub fn new(kind: SchemeKind, s_tp: f64) -> Result<Self> {
        if !(s_tp > 0.0) || s_tp.is_nan() {
            return Err(domain(format!("S_tp must be > 0, got {s_tp}")));
        }
        Ok(PicoScheme { kind, s_tp })
    }
}

/// Anything whose coverage probability can be asked for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Band(PicoBand),
    Scheme(PicoScheme),
    /// Cell-edge macro user, no picocells.
    MuEdgeNoPico { s_tm: f64 },
    /// Cell-edge macro user with picocells running PS2.
    MuEdgePs2 { s_tm: f64 },
    /// Cell-centre macro user, no picocells on the centre band (also PS2).
    MuCentreNoPico { s_tm: f64 },
    /// Cell-centre macro user with picocells running PS1.
    MuCentrePs1 { s_tm: f64 },
}

impl Target {
    pub fn label(&self) -> &'static str {
        match self {
            Target::Band(b) => b.label(),
            Target::Scheme(s) => s.kind.label(),
            Target::MuEdgeNoPico { .. } => "mu-edge-nopico",
            Target::MuEdgePs2 { .. } => "mu-edge-ps2",
            Target::MuCentreNoPico { .. } => "mu-centre-nopico",
            Target::MuCentrePs1 { .. } => "mu-centre-ps1",
        }
    }

    /// True for macro-user targets.
    pub fn is_macro_user(&self) -> bool {
        matches!(
            self,
            Target::MuEdgeNoPico { .. }
                | Target::MuEdgePs2 { .. }
                | Target::MuCentreNoPico { .. }
                | Target::MuCentrePs1 { .. }
        )
    }

    /// Builds a target from its label; `s_tp` / `s_tm` are linear thresholds
    /// used by the scheme and macro-user targets.
    pub fn from_label(label: &str, s_tp: f64, s_tm: f64) -> Result<Self> {
        let kind: TargetKind = label.parse()?;
        kind.with_thresholds(s_tp, s_tm)
    }
}

/// A target name without thresholds attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    Band(PicoBand),
    Scheme(SchemeKind),
    MuEdgeNoPico,
    MuEdgePs2,
    MuCentreNoPico,
    MuCentrePs1,
}

impl TargetKind {
    pub fn with_thresholds(self, s_tp: f64, s_tm: f64) -> Result<Target> {
        let check_tm = || {
            if s_tm > 0.0 && s_tm.is_finite() {
                Ok(s_tm)
            } else {
                Err(domain(format!("S_tm must be > 0, got {s_tm}")))
            }
        };
        Ok(match self {
            TargetKind::Band(b) => Target::Band(b),
            TargetKind::Scheme(k) => Target::Scheme(PicoScheme::new(k, s_tp)?),
            TargetKind::MuEdgeNoPico => Target::MuEdgeNoPico { s_tm: check_tm()? },
            TargetKind::MuEdgePs2 => Target::MuEdgePs2 { s_tm: check_tm()? },
            TargetKind::MuCentreNoPico => Target::MuCentreNoPico { s_tm: check_tm()? },
            TargetKind::MuCentrePs1 => Target::MuCentrePs1 { s_tm: check_tm()? },
        })
    }

    pub fn needs_s_tp(self) -> bool {
        matches!(self, TargetKind::Scheme(_))
    }

    pub fn scheme(self) -> Option<SchemeKind> {
        match self {
            TargetKind::Scheme(k) => Some(k),
            _ => None,
        }
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = match s.trim().to_ascii_lowercase().as_str() {
            "ffr-centre" | "ffr-center" => TargetKind::Band(PicoBand::FfrCentre),
            "ffr-edge" => TargetKind::Band(PicoBand::FfrEdge),
            "ffr-neighbour-edge" | "ffr-neighbor-edge" => TargetKind::Band(PicoBand::FfrNeighbourEdge),
            "sfr-centre" | "sfr-center" => TargetKind::Band(PicoBand::SfrCentre),
            "sfr-edge" => TargetKind::Band(PicoBand::SfrEdge),
            "conventional" => TargetKind::Band(PicoBand::Conventional),
            "ps1" => TargetKind::Scheme(SchemeKind::Ps1),
            "ps2" => TargetKind::Scheme(SchemeKind::Ps2),
            "mu-edge-nopico" => TargetKind::MuEdgeNoPico,
            "mu-edge-ps2" => TargetKind::MuEdgePs2,
            "mu-centre-nopico" | "mu-center-nopico" => TargetKind::MuCentreNoPico,
            "mu-centre-ps1" | "mu-center-ps1" => TargetKind::MuCentrePs1,
            other => return Err(domain(format!("unknown band or scheme '{other}'"))),
        };
        Ok(t)
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TargetKind::Band(b) => b.label(),
            TargetKind::Scheme(k) => k.label(),
            TargetKind::MuEdgeNoPico => "mu-edge-nopico",
            TargetKind::MuEdgePs2 => "mu-edge-ps2",
            TargetKind::MuCentreNoPico => "mu-centre-nopico",
            TargetKind::MuCentrePs1 => "mu-centre-ps1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyticOptions {
    /// Use the printed denominator `∫P[η_m > T]` for the PS1 cell-centre
    /// macro-user CP instead of the conditional `∫P[η_m > S_tm]`.
    pub paper_literal: bool,
}

/// Coverage probability of `target` at linear threshold `t`.
pub fn cp(target: &Target, t: f64, p: &NetworkParams, opts: AnalyticOptions) -> Result<f64> {
    match *target {
        Target::Band(PicoBand::FfrCentre) | Target::Band(PicoBand::Conventional) => cp_ffr_centre(t, p),
        Target::Band(PicoBand::FfrEdge) => cp_ffr_edge(t, p),
        Target::Band(PicoBand::FfrNeighbourEdge) => cp_ffr_neighbour_edge(t, p),
        Target::Band(PicoBand::SfrCentre) => cp_sfr_centre(t, p),
        Target::Band(PicoBand::SfrEdge) => cp_sfr_edge(t, p),
        Target::Scheme(s) => match s.kind {
            SchemeKind::Ps1 => cp_ps1(t, s.s_tp, p),
            SchemeKind::Ps2 => cp_ps2(t, s.s_tp, p),
        },
        Target::MuEdgeNoPico { s_tm } => cp_mu_edge_nopico(t, s_tm, p),
        Target::MuEdgePs2 { s_tm } => cp_mu_edge_ps2(t, s_tm, p),
        Target::MuCentreNoPico { s_tm } => cp_mu_centre_nopico(t, s_tm, p, opts.paper_literal),
        Target::MuCentrePs1 { s_tm } => cp_mu_centre_ps1(t, s_tm, p, opts.paper_literal),
    }
}

/// A sampled CP (or rate) curve over a dB grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub params_hash: u64,
    /// `(x_dB, value)` with strictly increasing `x_dB`.
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(label: impl Into<String>, params_hash: u64, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(domain("curve abscissae must be strictly increasing"));
        }
        Ok(Curve { label: label.into(), params_hash, points })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }
}

/// Evenly spaced dB grid `start, start + step, …` up to `stop` inclusive
/// (with a small tolerance on the last point).
pub fn db_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(domain(format!("invalid grid {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// Evaluates `target` on every point of `grid_db`, in parallel. Each grid
/// point is an independent pure computation, so the result does not depend
/// on scheduling.
pub fn curve(target: &Target, grid_db: &[f64], p: &NetworkParams, opts: AnalyticOptions) -> Result<Curve> {
    p.validate()?;
    let values: Result<Vec<f64>> = grid_db
        .par_iter()
        .map(|&db| cp(target, db_to_linear(db), p, opts))
        .collect();
    let points = grid_db.iter().copied().zip(values?).collect();
    Curve::new(target.label(), p.fingerprint(), points)
}

pub(crate) fn check_threshold(t: f64) -> Result<()> {
    if t >= 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(domain(format!("threshold must be ≥ 0, got {t}")))
    }
}

pub(crate) fn clamp_probability(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}
