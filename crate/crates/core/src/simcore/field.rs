use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;

use crate::analytic::PicoBand;
use crate::error::{domain, Result};
use crate::params::NetworkParams;
use crate::specfun::eta_sfr;

/// Where interferers are placed relative to the tagged user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// Interferers outside a ball of radius `R + Rg - r` around the user,
    /// exactly the geometry the analysis bounds the interference with. SFR
    /// far macros transmit at the band-averaged power `η P_m`.
    #[default]
    Faithful,
    /// Interferers outside the guard ball `B(o, R + Rg)` around the pico BS.
    /// SFR macros each pick a random edge band and transmit `β P_m` on it.
    Physical,
}

impl SimMode {
    pub fn label(self) -> &'static str {
        match self {
            SimMode::Faithful => "faithful",
            SimMode::Physical => "physical",
        }
    }
}

/// One interfering base station as seen by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub distance: f64,
    pub fading: f64,
    /// Edge sub-band in `0..δ`; band 0 is the reference cell's edge band.
    /// Always 0 for picos.
    pub edge_band: u32,
    gain: f64,
}

impl Interferer {
    pub fn new(distance: f64, fading: f64, edge_band: u32, alpha: f64) -> Self {
        Interferer {
            distance,
            fading,
            edge_band,
            gain: path_gain(distance * distance, alpha) * fading,
        }
    }

    /// `d^{-α} h`.
    pub fn gain(&self) -> f64 {
        self.gain
    }
}

/// `(d²)^{-α/2}`, with the common α = 4 done without `powf`.
fn path_gain(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

/// Interference snapshot around one user on one set of sub-bands.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Distance to the serving BS, m.
    pub user_distance: f64,
    /// Serving-link fading.
    pub serving_fade: f64,
    pub macros: Vec<Interferer>,
    pub picos: Vec<Interferer>,
    nearest: Option<usize>,
    pico_gain: f64,
}

impl Realization {
    pub fn new(user_distance: f64, serving_fade: f64, macros: Vec<Interferer>, picos: Vec<Interferer>) -> Self {
        let mut real = Realization {
            user_distance,
            serving_fade,
            macros,
            picos,
            nearest: None,
            pico_gain: 0.0,
        };
        real.refresh();
        real
    }

    fn refresh(&mut self) {
        self.nearest = self
            .macros
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance.total_cmp(&b.1.distance))
            .map(|(i, _)| i);
        self.pico_gain = self.picos.iter().map(Interferer::gain).sum();
    }

    /// Index of the macro closest to the user.
    pub fn nearest_macro(&self) -> Option<usize> {
        self.nearest
    }

    /// Distance `q` from the user to the nearest macro.
    pub fn nearest_macro_distance(&self) -> Option<f64> {
        self.nearest.map(|i| self.macros[i].distance)
    }

    /// Same positions and band plan with every fading value redrawn.
    pub fn refaded<R: Rng + ?Sized>(&self, alpha: f64, serving_fade: f64, rng: &mut R) -> Realization {
        let mut redraw = |v: &[Interferer]| -> Vec<Interferer> {
            v.iter()
                .map(|x| Interferer::new(x.distance, rng.sample(Exp1), x.edge_band, alpha))
                .collect()
        };
        let macros = redraw(&self.macros);
        let picos = redraw(&self.picos);
        Realization::new(self.user_distance, serving_fade, macros, picos)
    }
}

/// Radii of a homogeneous PPP of density `lambda` on the annulus
/// `inner ≤ |x| < outer`, generated outward from cumulative unit-rate
/// exponential spacings in `π|x|²`. Each point gets `visit(radius, rng)`,
/// which may draw its own marks; the draw order is fixed, so extending
/// `outer` only appends points.
pub(crate) fn ppp_annulus<R, F>(lambda: f64, inner: f64, outer: f64, rng: &mut R, mut visit: F)
where
    R: Rng + ?Sized,
    F: FnMut(f64, &mut R),
{
    if !(lambda > 0.0) || !(outer > inner) {
        return;
    }
    let scale = 1.0 / (PI * lambda);
    let outer2 = outer * outer;
    let mut d2 = inner * inner;
    loop {
        let e: f64 = rng.sample(Exp1);
        d2 += e * scale;
        if d2 >= outer2 {
            break;
        }
        visit(d2.sqrt(), rng);
    }
}

/// Macro field marks: fading, then the edge band.
fn macro_marks<R: Rng + ?Sized>(rng: &mut R, delta: u32) -> (f64, u32) {
    let fade: f64 = rng.sample(Exp1);
    (fade, rng.random_range(0..delta))
}

/// Macros around a user at `r` from the pico BS.
pub(crate) fn pu_macros<R: Rng + ?Sized>(p: &NetworkParams, mode: SimMode, r: f64, truncation: f64, rng: &mut R) -> Vec<Interferer> {
    let mut out = Vec::new();
    match mode {
        SimMode::Faithful => {
            ppp_annulus(p.lambda_macro, p.macro_exclusion(r), truncation, rng, |d, rng| {
                let (fade, band) = macro_marks(rng, p.delta);
                out.push(Interferer::new(d, fade, band, p.alpha));
            });
        }
        SimMode::Physical => {
            ppp_annulus(p.lambda_macro, p.radius + p.guard_macro, truncation, rng, |rho, rng| {
                let (fade, band) = macro_marks(rng, p.delta);
                let d = offset_distance(rho, r, rng);
                out.push(Interferer::new(d, fade, band, p.alpha));
            });
        }
    }
    out
}

/// Picos around a user at `r` from the pico BS.
pub(crate) fn pu_picos<R: Rng + ?Sized>(p: &NetworkParams, mode: SimMode, r: f64, truncation: f64, rng: &mut R) -> Vec<Interferer> {
    let mut out = Vec::new();
    match mode {
        SimMode::Faithful => {
            ppp_annulus(p.lambda_pico, p.pico_exclusion(r), truncation, rng, |d, rng| {
                out.push(Interferer::new(d, rng.sample(Exp1), 0, p.alpha));
            });
        }
        SimMode::Physical => {
            ppp_annulus(p.lambda_pico, p.radius + p.guard_pico, truncation, rng, |rho, rng| {
                let fade: f64 = rng.sample(Exp1);
                let d = offset_distance(rho, r, rng);
                out.push(Interferer::new(d, fade, 0, p.alpha));
            });
        }
    }
    out
}

/// Distance from a user at `(r, 0)` to a point at radius `rho` and a
/// uniform angle around the origin.
fn offset_distance<R: Rng + ?Sized>(rho: f64, r: f64, rng: &mut R) -> f64 {
    let theta = 2.0 * PI * rng.random::<f64>();
    (rho * rho + r * r - 2.0 * rho * r * theta.cos()).max(0.0).sqrt()
}

/// Macros beyond the serving distance `r` of a macro user.
pub(crate) fn mu_macros<R: Rng + ?Sized>(p: &NetworkParams, r: f64, truncation: f64, rng: &mut R) -> Vec<Interferer> {
    let mut out = Vec::new();
    ppp_annulus(p.lambda_macro, r, truncation, rng, |d, rng| {
        let (fade, band) = macro_marks(rng, p.delta);
        out.push(Interferer::new(d, fade, band, p.alpha));
    });
    out
}

/// Picos beyond `R` from a macro user.
pub(crate) fn mu_picos<R: Rng + ?Sized>(p: &NetworkParams, truncation: f64, rng: &mut R) -> Vec<Interferer> {
    let mut out = Vec::new();
    ppp_annulus(p.lambda_pico, p.radius, truncation, rng, |d, rng| {
        out.push(Interferer::new(d, rng.sample(Exp1), 0, p.alpha));
    });
    out
}

/// Pico-user distance with density `2r/R²` on `(0, R]`.
pub(crate) fn pu_distance<R: Rng + ?Sized>(p: &NetworkParams, rng: &mut R) -> f64 {
    p.radius * (1.0 - rng.random::<f64>()).sqrt()
}

/// Macro-user distance to the nearest macro, Rayleigh with `2πλ_m r e^{-πλ_m r²}`.
pub(crate) fn mu_distance<R: Rng + ?Sized>(p: &NetworkParams, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    (e / (PI * p.lambda_macro)).sqrt()
}

/// Full pico-user snapshot from a single generator: distance, serving
/// fade, macro field, pico field.
pub fn sample_realization<R: Rng + ?Sized>(p: &NetworkParams, mode: SimMode, truncation: f64, rng: &mut R) -> Result<Realization> {
    p.validate()?;
    if !(truncation > p.radius + p.guard_macro.max(p.guard_pico)) {
        return Err(domain(format!(
            "truncation radius {truncation} m must exceed the guard geometry {} m",
            p.radius + p.guard_macro.max(p.guard_pico)
        )));
    }
    let r = pu_distance(p, rng);
    Ok(sample_realization_at(p, mode, r, truncation, rng))
}

/// As [`sample_realization`] with the user distance fixed.
pub fn sample_realization_at<R: Rng + ?Sized>(p: &NetworkParams, mode: SimMode, r: f64, truncation: f64, rng: &mut R) -> Realization {
    let g: f64 = rng.sample(Exp1);
    let macros = pu_macros(p, mode, r, truncation, rng);
    let picos = pu_picos(p, mode, r, truncation, rng);
    Realization::new(r, g, macros, picos)
}

fn check_distance(real: &Realization) -> Result<()> {
    if real.user_distance > 0.0 && real.user_distance.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("user distance must be > 0, got {}", real.user_distance)))
    }
}

fn ratio(signal: f64, interference: f64) -> f64 {
    if interference > 0.0 {
        signal / interference
    } else {
        f64::INFINITY
    }
}

/// SIR of a pico user on `band`; `+∞` when nothing interferes.
pub fn sir_pu(real: &Realization, band: PicoBand, p: &NetworkParams, mode: SimMode) -> Result<f64> {
    check_distance(real)?;
    let signal = p.p_pico * path_gain(real.user_distance * real.user_distance, p.alpha) * real.serving_fade;
    let macros = &real.macros;
    let near = real.nearest;
    let macro_gain = match band {
        PicoBand::FfrCentre | PicoBand::Conventional => macros.iter().map(Interferer::gain).sum(),
        PicoBand::FfrEdge => macros.iter().filter(|m| m.edge_band == 0).map(Interferer::gain).sum(),
        PicoBand::FfrNeighbourEdge => {
            let nb = 1 % p.delta;
            macros
                .iter()
                .enumerate()
                .filter(|&(i, m)| m.edge_band == nb && Some(i) != near)
                .map(|(_, m)| m.gain)
                .sum()
        }
        PicoBand::SfrCentre | PicoBand::SfrEdge => {
            let edge = band == PicoBand::SfrEdge;
            let boost = if edge { p.beta } else { 1.0 };
            let near_gain = near.map_or(0.0, |i| macros[i].gain);
            let others = macros.iter().enumerate().filter(|&(i, _)| Some(i) != near);
            let far = match mode {
                SimMode::Faithful => eta_sfr(p.delta_f64(), p.beta)? * others.map(|(_, m)| m.gain).sum::<f64>(),
                SimMode::Physical => {
                    let this_band = if edge { 0 } else { 1 };
                    others
                        .map(|(_, m)| if m.edge_band == this_band { p.beta * m.gain } else { m.gain })
                        .sum()
                }
            };
            boost * near_gain + far
        }
    };
    Ok(ratio(signal, p.p_macro * macro_gain + p.p_pico * real.pico_gain))
}

/// Frequency resource of a macro user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroBand {
    /// Reuse-1 centre band; `picos` when the picocells also use it (PS1).
    Centre { picos: bool },
    /// The serving cell's edge band (macros with edge band 0); `picos` when
    /// the picocells use the edge bands (PS2).
    Edge { picos: bool },
}

/// SIR of a macro user; `+∞` when nothing interferes.
pub fn sir_mu(real: &Realization, band: MacroBand, p: &NetworkParams) -> Result<f64> {
    check_distance(real)?;
    let signal = p.p_macro * path_gain(real.user_distance * real.user_distance, p.alpha) * real.serving_fade;
    let (macro_gain, picos): (f64, bool) = match band {
        MacroBand::Centre { picos } => (real.macros.iter().map(Interferer::gain).sum(), picos),
        MacroBand::Edge { picos } => (
            real.macros.iter().filter(|m| m.edge_band == 0).map(Interferer::gain).sum(),
            picos,
        ),
    };
    let pico = if picos { p.p_pico * real.pico_gain } else { 0.0 };
    Ok(ratio(signal, p.p_macro * macro_gain + pico))
}
