use std::f64::consts::PI;

use super::{check_threshold, clamp_probability};
use crate::error::Result;
use crate::numerics::{try_expect_q, try_integrate_finite, QuadratureSpec};
use crate::params::NetworkParams;
use crate::specfun::{cee, dist_l_p, dist_l_scaled, eta_sfr, kernel_k, kernel_khat};

fn outer_spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

// The q-expectation sits inside the radial integral; keeping it two orders
// tighter stops its error from showing up as noise in the outer estimate.
fn inner_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        max_subdivisions: 2000,
    }
}

/// Per-distance success probabilities `P[η(r) > T]` of a pico user at
/// distance `r` from its BS, one per frequency resource.
#[derive(Debug, Clone)]
pub struct PicoKernels<'a> {
    p: &'a NetworkParams,
    inner: QuadratureSpec,
}

impl<'a> PicoKernels<'a> {
    pub fn new(p: &'a NetworkParams) -> Self {
        PicoKernels { p, inner: inner_spec() }
    }

    /// FFR centre band: `exp(-π r² T^{2/α} K(r))`.
    pub fn centre(&self, r: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        Ok((-PI * r * r * t.powf(2.0 / self.p.alpha) * kernel_k(r, t, self.p)?).exp())
    }

    /// Own-cell FFR edge band: macro density thinned by δ.
    pub fn edge(&self, r: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        Ok((-PI * r * r * t.powf(2.0 / self.p.alpha) * kernel_khat(r, t, self.p)?).exp())
    }

    /// Success probability against the pico tier alone,
    /// `exp(-π r² T^{2/α} C(L_p(r)) λ_p)`.
    pub fn pico_only(&self, r: f64, t: f64) -> Result<f64> {
        let p = self.p;
        if t == 0.0 || p.lambda_pico == 0.0 {
            return Ok(1.0);
        }
        let c = cee(dist_l_p(r, t, p)?, p.alpha)?;
        Ok((-PI * r * r * t.powf(2.0 / p.alpha) * c * p.lambda_pico).exp())
    }

    /// Neighbouring-cell FFR edge band: the nearest macro is silent and the
    /// remaining macros, all beyond `q`, are thinned by δ.
    pub fn neighbour_edge(&self, r: f64, t: f64) -> Result<f64> {
        let p = self.p;
        let pico = self.pico_only(r, t)?;
        if t == 0.0 || p.lambda_macro == 0.0 {
            return Ok(pico);
        }
        let s = t * p.power_ratio();
        let scale = PI * r * r * s.powf(2.0 / p.alpha) * p.lambda_macro / p.delta_f64();
        let macro_part = try_expect_q(
            |q| Ok((-scale * cee(dist_l_scaled(r, q, s, p.alpha)?, p.alpha)?).exp()),
            r,
            p,
            &self.inner,
        )?;
        Ok(pico * macro_part)
    }

    /// SFR band with the nearest macro at `boost · P_m` and every other
    /// macro at the band-averaged power `η P_m`, all beyond `q`.
    pub fn sfr(&self, r: f64, t: f64, boost: f64) -> Result<f64> {
        let p = self.p;
        let pico = self.pico_only(r, t)?;
        if t == 0.0 || p.lambda_macro == 0.0 {
            return Ok(pico);
        }
        let eta = eta_sfr(p.delta_f64(), p.beta)?;
        let near_scale = boost * t * r.powf(p.alpha) * p.power_ratio();
        let s_far = eta * t * p.power_ratio();
        let far_scale = PI * r * r * s_far.powf(2.0 / p.alpha) * p.lambda_macro;
        let macro_part = try_expect_q(
            |q| {
                let nearest = 1.0 / (1.0 + near_scale * q.powf(-p.alpha));
                let far = (-far_scale * cee(dist_l_scaled(r, q, s_far, p.alpha)?, p.alpha)?).exp();
                Ok(nearest * far)
            },
            r,
            p,
            &self.inner,
        )?;
        Ok(pico * macro_part)
    }
}

/// `∫_0^R h(r) 2r/R² dr`, integrated in `s = r/R`.
fn average_over_cell<F>(p: &NetworkParams, mut h: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    p.validate()?;
    let radius = p.radius;
    let q = try_integrate_finite(|s| Ok(h(radius * s)? * 2.0 * s), 0.0, 1.0, &outer_spec())?;
    Ok(clamp_probability(q.value))
}

/// CP on the FFR centre band; also the conventional (reuse-1) scheme.
pub fn cp_ffr_centre(t: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| k.centre(r, t))
}

/// CP on the reference cell's own FFR edge band.
pub fn cp_ffr_edge(t: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| k.edge(r, t))
}

/// CP on a neighbouring cell's FFR edge band.
pub fn cp_ffr_neighbour_edge(t: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| k.neighbour_edge(r, t))
}

/// PS1: `∫ (P_c(r, max{S_tp, T}) + P_n(r, T) (1 - P_c(r, S_tp))) 2r/R² dr`.
pub fn cp_ps1(t: f64, s_tp: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    check_threshold(s_tp)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| {
        let centre = k.centre(r, s_tp.max(t))?;
        let fallback = k.neighbour_edge(r, t)? * (1.0 - k.centre(r, s_tp)?);
        Ok(centre + fallback)
    })
}

/// PS2: as PS1 with the own-cell edge band serving (and classifying) the
/// centre users.
pub fn cp_ps2(t: f64, s_tp: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    check_threshold(s_tp)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| {
        let centre = k.edge(r, s_tp.max(t))?;
        let fallback = k.neighbour_edge(r, t)? * (1.0 - k.edge(r, s_tp)?);
        Ok(centre + fallback)
    })
}

/// CP on an SFR centre band.
pub fn cp_sfr_centre(t: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| k.sfr(r, t, 1.0))
}

/// CP on the SFR edge band: nearest-macro interference boosted by β.
pub fn cp_sfr_edge(t: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    let k = PicoKernels::new(p);
    average_over_cell(p, |r| k.sfr(r, t, p.beta))
}
