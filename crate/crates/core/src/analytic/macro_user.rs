//! Macro users at distance `r` from their (nearest) macro BS, other macros
//! beyond `r`. With Rayleigh fading `P[η(r) > T] = e^{-πλ_m r² ρ(T, δ)}` on a
//! band reused every δ cells; pico interferers, when present on the band,
//! are beyond `R` from the user.

use std::f64::consts::PI;

use super::{check_threshold, clamp_probability};
use crate::error::{domain, Result};
use crate::numerics::{try_integrate_semiinf_scaled, QuadratureSpec};
use crate::params::NetworkParams;
use crate::specfun::{cee, dist_l_scaled, rho};

fn check_macro_tier(p: &NetworkParams) -> Result<()> {
    p.validate()?;
    if p.lambda_macro > 0.0 {
        Ok(())
    } else {
        Err(domain("macro-user coverage needs a macro tier (λ_m > 0)"))
    }
}

fn check_classifier(s_tm: f64) -> Result<()> {
    if s_tm > 0.0 && s_tm.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("S_tm must be > 0, got {s_tm}")))
    }
}

/// Laplace factor of the pico tier seen by a macro user at distance `r`
/// with threshold `t`: `exp(-π λ_p r² (T P_p/P_m)^{2/α} C(R/r · (T P_p/P_m)^{-1/α}))`.
fn pico_factor(r: f64, t: f64, p: &NetworkParams) -> Result<f64> {
    if t == 0.0 || p.lambda_pico == 0.0 {
        return Ok(1.0);
    }
    let s = t / p.power_ratio();
    let c = cee(dist_l_scaled(r, p.radius, s, p.alpha)?, p.alpha)?;
    Ok((-PI * p.lambda_pico * r * r * s.powf(2.0 / p.alpha) * c).exp())
}

/// `∫_0^∞ h(r) 2πλ_m r e^{-πλ_m r²} dr` over the serving distance.
fn average_over_serving_distance<F>(p: &NetworkParams, mut h: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let lambda = p.lambda_macro;
    let scale = 1.0 / (PI * lambda).sqrt();
    let q = try_integrate_semiinf_scaled(
        |r| Ok(2.0 * PI * lambda * r * (-PI * lambda * r * r).exp() * h(r)?),
        0.0,
        scale,
        &QuadratureSpec::default(),
    )?;
    Ok(q.value)
}

/// Cell-edge macro user without picocells, closed form
/// `(1 + ρ(S,1)) / ((1 + ρ(T,δ)) (1 + ρ(T,δ) + ρ(S,1)))`.
pub fn cp_mu_edge_nopico(t: f64, s_tm: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    check_classifier(s_tm)?;
    p.validate()?;
    let rt = rho(t, p.delta_f64(), p.alpha)?;
    let rs = rho(s_tm, 1.0, p.alpha)?;
    Ok(clamp_probability((1.0 + rs) / ((1.0 + rt) * (1.0 + rt + rs))))
}

/// The same quantity as the ratio of the two distance integrals it was
/// solved from; used to cross-check the closed form.
pub fn cp_mu_edge_nopico_integral(t: f64, s_tm: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    check_classifier(s_tm)?;
    check_macro_tier(p)?;
    let lambda = p.lambda_macro;
    let rt = rho(t, p.delta_f64(), p.alpha)?;
    let rs = rho(s_tm, 1.0, p.alpha)?;
    let edge_prob = |r: f64| 1.0 - (-PI * lambda * r * r * rs).exp();
    let num = average_over_serving_distance(p, |r| Ok((-PI * lambda * r * r * rt).exp() * edge_prob(r)))?;
    let den = average_over_serving_distance(p, |r| Ok(edge_prob(r)))?;
    Ok(clamp_probability(num / den))
}

/// Cell-edge macro user when the picocells run PS2 (pico interference on
/// the macro edge band).
pub fn cp_mu_edge_ps2(t: f64, s_tm: f64, p: &NetworkParams) -> Result<f64> {
    check_threshold(t)?;
    check_classifier(s_tm)?;
    check_macro_tier(p)?;
    let lambda = p.lambda_macro;
    let rt = rho(t, p.delta_f64(), p.alpha)?;
    let rs = rho(s_tm, 1.0, p.alpha)?;
    let num = average_over_serving_distance(p, |r| {
        let v = PI * lambda * r * r;
        Ok((-v * rt).exp() * pico_factor(r, t, p)? * (1.0 - (-v * rs).exp()))
    })?;
    let den = 1.0 - 1.0 / (1.0 + rs);
    Ok(clamp_probability(num / den))
}

fn cp_mu_centre(t: f64, s_tm: f64, p: &NetworkParams, with_picos: bool, paper_literal: bool) -> Result<f64> {
    check_threshold(t)?;
    check_classifier(s_tm)?;
    check_macro_tier(p)?;
    let lambda = p.lambda_macro;
    let covered = |x: f64| -> Result<f64> {
        let rx = rho(x, 1.0, p.alpha)?;
        average_over_serving_distance(p, |r| {
            let pico = if with_picos { pico_factor(r, x, p)? } else { 1.0 };
            Ok((-PI * lambda * r * r * rx).exp() * pico)
        })
    };
    let num = covered(s_tm.max(t))?;
    let den = covered(if paper_literal { t } else { s_tm })?;
    let ratio = num / den;
    Ok(clamp_probability(ratio))
}

/// Cell-centre macro user, `P[η_m > max{S_tm, T} | η_m > S_tm]`, without pico
/// interference on the centre band (no picocells, or PS2).
pub fn cp_mu_centre_nopico(t: f64, s_tm: f64, p: &NetworkParams, paper_literal: bool) -> Result<f64> {
    cp_mu_centre(t, s_tm, p, false, paper_literal)
}

/// Cell-centre macro user with the picocells running PS1.
pub fn cp_mu_centre_ps1(t: f64, s_tm: f64, p: &NetworkParams, paper_literal: bool) -> Result<f64> {
    cp_mu_centre(t, s_tm, p, true, paper_literal)
}
