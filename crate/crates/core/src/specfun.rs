//! Closed-form interference kernels.
//!
//! Every Laplace transform of a PPP interference field with Rayleigh fading
//! reduces to the integral
//!
//! ```text
//! C(L, α) = 2 ∫_L^∞ t / (1 + t^α) dt
//!         = 2 L^{2-α} / (α - 2) · ₂F₁(1, (α-2)/α; 2 - 2/α; -L^{-α})
//! ```
//!
//! so the only special function needed is the one-parameter family
//! `₂F₁(1, b; b + 1; z)` with `z ≤ 0`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::params::NetworkParams;

const MAX_TERMS: usize = 1_000_000;
const SERIES_TOL: f64 = 1e-15;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("path-loss exponent must satisfy α > 2, got {alpha}")))
    }
}

/// `₂F₁(1, b; b + 1; z)` for `0 < b < 1` and `z ≤ 0`.
///
/// On `[-1, 0]` the Pfaff transformation maps the argument to
/// `w = z / (z - 1) ∈ [0, 1/2]`:
/// `₂F₁(1, b; b+1; z) = (1 - z)^{-1} ₂F₁(1, 1; b+1; w)`, whose terms
/// shrink at least geometrically by `w`. For `z < -1` the reflection
///
/// ```text
/// ₂F₁(1, b; b+1; -y) = b y^{-b} [ π / sin(πb) - y^{b-1} / (1-b) · ₂F₁(1, 1-b; 2-b; -1/y) ]
/// ```
///
/// brings the argument back into `(-1, 0)`.
fn hyp2f1_unit(b: f64, z: f64) -> Result<f64> {
    debug_assert!(b > 0.0 && b < 1.0);
    if z.is_nan() || z > 0.0 {
        return Err(domain(format!("argument must be ≤ 0, got {z}")));
    }
    if z >= -1.0 {
        return pfaff_series(b, z);
    }
    if z == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let y = -z;
    let inner = pfaff_series(1.0 - b, -1.0 / y)?;
    let bracket = PI / (PI * b).sin() - y.powf(b - 1.0) / (1.0 - b) * inner;
    Ok(b * y.powf(-b) * bracket)
}

fn pfaff_series(b: f64, z: f64) -> Result<f64> {
    let w = z / (z - 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (kf + 1.0) / (b + 1.0 + kf) * w;
        sum += term;
        if term <= SERIES_TOL * sum {
            return Ok(sum / (1.0 - z));
        }
    }
    Err(Error::NonConvergence { terms: MAX_TERMS })
}

/// `₂F₁(1, (α-2)/α; 2 - 2/α; z)` for `z ≤ 0`. Values lie in `(0, 1]`.
pub fn hyp2f1_cell(alpha: f64, z: f64) -> Result<f64> {
    check_alpha(alpha)?;
    hyp2f1_unit((alpha - 2.0) / alpha, z)
}

/// `C(L, α) = 2 ∫_L^∞ t / (1 + t^α) dt`.
///
/// `C(0, α) = 2π / (α sin(2π/α))`, strictly decreasing, zero at `L = ∞`.
/// For `L < 1` the complement `C(0) - 2∫_0^L` is used, which keeps the
/// hypergeometric argument `-L^α` inside `(-1, 0)` and avoids overflow of
/// `L^{2-α}` for tiny `L`.
pub fn cee(l: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if l.is_nan() || l < 0.0 {
        return Err(domain(format!("C(L, α) needs L ≥ 0, got {l}")));
    }
    if l == f64::INFINITY {
        return Ok(0.0);
    }
    let full = 2.0 * PI / (alpha * (2.0 * PI / alpha).sin());
    if l == 0.0 {
        return Ok(full);
    }
    if l < 1.0 {
        // 2∫_0^L t/(1+t^α) dt = L² ₂F₁(1, 2/α; 1 + 2/α; -L^α)
        let head = l * l * hyp2f1_unit(2.0 / alpha, -l.powf(alpha))?;
        Ok(full - head)
    } else {
        let f = hyp2f1_unit((alpha - 2.0) / alpha, -l.powf(-alpha))?;
        Ok(2.0 * l.powf(2.0 - alpha) / (alpha - 2.0) * f)
    }
}

/// `ρ(T, δ) = 2T / (δ(α-2)) · ₂F₁(1, (α-2)/α; 2 - 2/α; -T)`.
pub fn rho(t: f64, delta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t.is_nan() || t < 0.0 {
        return Err(domain(format!("threshold must be ≥ 0, got {t}")));
    }
    if !(delta >= 1.0) {
        return Err(domain(format!("reuse factor must be ≥ 1, got {delta}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * t / (delta * (alpha - 2.0)) * hyp2f1_cell(alpha, -t)?)
}

fn check_user_distance(r: f64, p: &NetworkParams) -> Result<()> {
    if r > 0.0 && r <= p.radius {
        Ok(())
    } else {
        Err(domain(format!("user distance must lie in (0, {}], got {r}", p.radius)))
    }
}

/// `L_p(r) = (R + Rg_p - r) / r · T^{-1/α}`.
pub fn dist_l_p(r: f64, t: f64, p: &NetworkParams) -> Result<f64> {
    check_user_distance(r, p)?;
    Ok(p.pico_exclusion(r) / r * t.powf(-1.0 / p.alpha))
}

/// `L_m(r) = (R + Rg_m - r) / r · (T P_m/P_p)^{-1/α}`.
pub fn dist_l_m(r: f64, t: f64, p: &NetworkParams) -> Result<f64> {
    check_user_distance(r, p)?;
    Ok(p.macro_exclusion(r) / r * (t * p.power_ratio()).powf(-1.0 / p.alpha))
}

/// `L_m(q, r) = q / r · (T P_m/P_p)^{-1/α}`.
pub fn dist_l_mq(r: f64, q: f64, t: f64, p: &NetworkParams) -> Result<f64> {
    dist_l_scaled(r, q, t * p.power_ratio(), p.alpha)
}

/// `x / r · s^{-1/α}`: the lower integration limit after the change of
/// variable `t = s^{-1/α} x` for interferers no closer than `x` and an
/// effective threshold `s` (threshold times power ratio).
pub fn dist_l_scaled(r: f64, x: f64, s: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain(format!("user distance must be > 0, got {r}")));
    }
    if !(x > 0.0) {
        return Err(domain(format!("exclusion distance must be > 0, got {x}")));
    }
    Ok(x / r * s.powf(-1.0 / alpha))
}

/// `K(r) = (P_m/P_p)^{2/α} C(L_m(r)) λ_m + C(L_p(r)) λ_p`.
pub fn kernel_k(r: f64, t: f64, p: &NetworkParams) -> Result<f64> {
    kernel_thinned(r, t, p, 1.0)
}

/// `K̂(r)`: as [`kernel_k`] with the macro density thinned by δ.
pub fn kernel_khat(r: f64, t: f64, p: &NetworkParams) -> Result<f64> {
    kernel_thinned(r, t, p, p.delta_f64())
}

fn kernel_thinned(r: f64, t: f64, p: &NetworkParams, thinning: f64) -> Result<f64> {
    let macro_term = if p.lambda_macro > 0.0 {
        p.power_ratio().powf(2.0 / p.alpha)
            * cee(dist_l_m(r, t, p)?, p.alpha)?
            * p.lambda_macro
            / thinning
    } else {
        0.0
    };
    let pico_term = if p.lambda_pico > 0.0 {
        cee(dist_l_p(r, t, p)?, p.alpha)? * p.lambda_pico
    } else {
        0.0
    };
    Ok(macro_term + pico_term)
}

/// SFR effective power factor of non-nearest macros, `η = (δ - 1 + β) / δ`.
pub fn eta_sfr(delta: f64, beta: f64) -> Result<f64> {
    if !(delta >= 1.0) || !(beta >= 1.0) {
        return Err(domain(format!("η needs δ ≥ 1 and β ≥ 1, got δ={delta}, β={beta}")));
    }
    Ok((delta - 1.0 + beta) / delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Composite Simpson on t = L + u/(1-u), independent of the series code.
    // Simpson on [L, M] plus the convergent tail series
    // ∫_M^∞ t/(1+t^α) dt = Σ (-1)^k M^{2-α(k+1)} / (α(k+1) - 2).
    fn simpson_c(l: f64, alpha: f64) -> f64 {
        let m = 50.0;
        let n = 400_000;
        let h = (m - l) / n as f64;
        let g = |t: f64| t / (1.0 + t.powf(alpha));
        let mut s = g(l) + g(m);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(l + i as f64 * h);
        }
        let mut tail = 0.0;
        for k in 0..60 {
            let e = alpha * (k as f64 + 1.0);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            tail += sign * m.powf(2.0 - e) / (e - 2.0);
        }
        2.0 * (s * h / 3.0 + tail)
    }

    #[test]
    fn hyp2f1_at_zero_is_one() {
        assert_eq!(hyp2f1_cell(4.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn hyp2f1_arctan_identity() {
        assert_relative_eq!(hyp2f1_cell(4.0, -1.0).unwrap(), PI / 4.0, max_relative = 1e-14);
        for x in [0.3f64, 2.0, 10.0, 1e3] {
            let v = hyp2f1_cell(4.0, -x * x).unwrap();
            assert_relative_eq!(v, x.atan() / x, max_relative = 1e-13);
        }
    }

    #[test]
    fn hyp2f1_alpha_3_2_matches_quadrature() {
        // (α-2) ∫_1^∞ t/(1+t^α) dt; frozen with mpmath at 30 digits.
        let frozen = 0.821_694_657_625_555_8;
        assert_relative_eq!(hyp2f1_cell(3.2, -1.0).unwrap(), frozen, max_relative = 1e-13);
        let alpha = 3.2;
        let by_simpson = (alpha - 2.0) * simpson_c(1.0, alpha) / 2.0;
        assert_relative_eq!(hyp2f1_cell(alpha, -1.0).unwrap(), by_simpson, max_relative = 1e-9);
    }

    #[test]
    fn hyp2f1_rejects_bad_input() {
        assert!(matches!(hyp2f1_cell(2.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1_cell(1.5, -1.0), Err(Error::Domain(_))));
        assert!(hyp2f1_cell(4.0, 0.5).is_err());
    }

    #[test]
    fn cee_examples() {
        assert_eq!(cee(f64::INFINITY, 4.0).unwrap(), 0.0);
        assert!(cee(1e8, 4.0).unwrap() < 1e-15);
        assert_relative_eq!(cee(1.0, 4.0).unwrap(), PI / 4.0, max_relative = 1e-14);
        assert_relative_eq!(cee(2.0, 4.0).unwrap(), PI / 2.0 - 4f64.atan(), max_relative = 1e-13);
        assert_relative_eq!(cee(2.0, 4.0).unwrap(), 0.244_978_663_126_864_14, max_relative = 1e-13);
        for alpha in [2.5, 3.0, 3.2, 4.0, 5.0] {
            let full = 2.0 * PI / (alpha * (2.0 * PI / alpha).sin());
            assert_relative_eq!(cee(0.0, alpha).unwrap(), full, max_relative = 1e-15);
            assert_relative_eq!(cee(1e-9, alpha).unwrap(), full, max_relative = 1e-12);
        }
        assert!(cee(-1.0, 4.0).is_err());
        assert!(cee(1.0, 2.0).is_err());
    }

    #[test]
    // The α = 4 row holds C(1) = π/4 as frozen, not as a constant.
    #[allow(clippy::approx_constant)]
    fn cee_grid_matches_frozen_quadrature() {
        // mpmath quad of 2∫_L^∞ t/(1+t^α) dt.
        let ls = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
        let table: [(f64, [f64; 6]); 5] = [
            (2.5, [4.265851354524738, 4.043502276599957, 3.5532542906071547, 2.752267700879611, 1.7835724566653282, 1.2642455448258423]),
            (3.0, [2.408403149814107, 2.180003460456921, 1.6712976965294422, 0.9708038843007758, 0.3992036367880742, 0.19995002855144395]),
            (3.2, [2.115274541274999, 1.8850818034343637, 1.369491096042593, 0.7051892835877913, 0.24121245807012934, 0.10514146824017973]),
            (4.0, [1.5607966601082315, 1.3258176636680326, 0.7853981633974483, 0.24497866312686414, 0.039978687123290044, 0.009999666686665238]),
            (5.0, [1.3113064282489115, 1.0734987288697624, 0.5075031310987989, 0.08237513713296069, 0.005332693459334983, 0.0006666641666820512]),
        ];
        for (alpha, row) in table {
            for (l, want) in ls.iter().zip(row) {
                let got = cee(*l, alpha).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn cee_close_to_simpson_on_both_branches() {
        for (l, alpha) in [(0.7, 3.2), (1.3, 2.5), (3.0, 5.0)] {
            assert_relative_eq!(cee(l, alpha).unwrap(), simpson_c(l, alpha), max_relative = 1e-8);
        }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(0.0, 3.0, 4.0).unwrap(), 0.0);
        assert_relative_eq!(rho(1.0, 1.0, 4.0).unwrap(), PI / 4.0, max_relative = 1e-14);
        assert_relative_eq!(rho(3.0, 1.0, 4.0).unwrap(), 3f64.sqrt() * 3f64.sqrt().atan(), max_relative = 1e-13);
        assert_relative_eq!(rho(3.0, 1.0, 4.0).unwrap(), 1.813_799_364_234_217_8, max_relative = 1e-13);
        assert_relative_eq!(rho(10.0, 1.0, 3.2).unwrap(), 7.998_438_709_915_209, max_relative = 1e-12);
        assert_relative_eq!(rho(0.1, 1.0, 2.5).unwrap(), 0.393_673_732_494_419_5, max_relative = 1e-12);
        assert!(rho(1.0, 1.0, 2.0).is_err());
        assert!(rho(-1.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn distance_maps() {
        let p = NetworkParams::default();
        let r = p.radius;
        assert_relative_eq!(dist_l_p(r, 1.0, &p).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dist_l_p(r / 2.0, 1.0, &p).unwrap(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(dist_l_p(r / 2.0, 16.0, &p).unwrap(), 1.5, max_relative = 1e-15);
        assert!(dist_l_p(0.0, 1.0, &p).is_err());
        assert!(dist_l_p(r * 1.01, 1.0, &p).is_err());

        let mut eq = p.clone();
        eq.p_macro = eq.p_pico;
        eq.guard_macro = eq.radius;
        assert_relative_eq!(dist_l_m(r, 1.0, &eq).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dist_l_mq(r / 4.0, r / 4.0, 1.0, &eq).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dist_l_mq(10.0, 20.0, 16.0, &eq).unwrap(), 1.0, max_relative = 1e-15);

        let mut x16 = p.clone();
        x16.p_macro = 16.0 * x16.p_pico;
        x16.reset_guards();
        assert_relative_eq!(x16.guard_macro, 2.0 * r, max_relative = 1e-15);
        assert_relative_eq!(dist_l_m(r, 1.0, &x16).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dist_l_m(r / 2.0, 1.0, &x16).unwrap(), 2.5, max_relative = 1e-15);
        assert_relative_eq!(dist_l_mq(10.0, 30.0, 1.0, &x16).unwrap(), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn kernels() {
        let p = NetworkParams::default();
        let none = p.clone().with_densities(0.0, 0.0);
        assert_eq!(kernel_k(100.0, 1.0, &none).unwrap(), 0.0);

        let pico_only = p.clone().with_densities(0.0, p.lambda_pico);
        let lp = dist_l_p(100.0, 1.0, &p).unwrap();
        assert_relative_eq!(
            kernel_k(100.0, 1.0, &pico_only).unwrap(),
            cee(lp, 4.0).unwrap() * p.lambda_pico,
            max_relative = 1e-15
        );

        // mpmath quadrature of both C terms at r = 100 m, T = 1.
        assert_relative_eq!(kernel_k(100.0, 1.0, &p).unwrap(), 5.460_271_102_642_383e-7, max_relative = 1e-9);
        assert_relative_eq!(kernel_khat(100.0, 1.0, &p).unwrap(), 2.672_150_970_586_457_4e-7, max_relative = 1e-9);

        let d1 = p.clone().with_delta(1);
        assert_eq!(kernel_khat(100.0, 1.0, &d1).unwrap(), kernel_k(100.0, 1.0, &d1).unwrap());

        let macro_only = p.clone().with_densities(p.lambda_macro, 0.0);
        assert_relative_eq!(
            kernel_khat(100.0, 1.0, &macro_only).unwrap(),
            kernel_k(100.0, 1.0, &macro_only).unwrap() / 3.0,
            max_relative = 1e-15
        );
        assert!(kernel_khat(100.0, 1.0, &p).unwrap() < kernel_k(100.0, 1.0, &p).unwrap());
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_sfr(3.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(eta_sfr(3.0, 2.0).unwrap(), 4.0 / 3.0);
        assert_eq!(eta_sfr(3.0, 4.0).unwrap(), 2.0);
        assert!(eta_sfr(3.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn consistency_identity(t in 1e-3f64..1e3, alpha in 2.05f64..8.0, delta in 1u32..6) {
            let d = f64::from(delta);
            let lhs = d * rho(t, d, alpha).unwrap();
            let rhs = t.powf(2.0 / alpha) * cee(t.powf(-1.0 / alpha), alpha).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
        }

        #[test]
        fn cee_decreasing(l in 0.0f64..50.0, dl in 1e-3f64..5.0, alpha in 2.1f64..6.0) {
            prop_assert!(cee(l + dl, alpha).unwrap() < cee(l, alpha).unwrap());
        }

        #[test]
        fn rho_increasing_and_scaled(t in 0.0f64..100.0, dt in 1e-3f64..10.0, alpha in 2.1f64..6.0, delta in 1u32..6) {
            let d = f64::from(delta);
            prop_assert!(rho(t + dt, 1.0, alpha).unwrap() > rho(t, 1.0, alpha).unwrap());
            let r1 = rho(t, 1.0, alpha).unwrap();
            prop_assert!((rho(t, d, alpha).unwrap() - r1 / d).abs() <= 1e-15 * r1.max(1e-300));
        }

        #[test]
        fn hyp2f1_in_unit_interval(z in -1e6f64..0.0, alpha in 2.05f64..10.0) {
            let v = hyp2f1_cell(alpha, z).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
        }

        #[test]
        fn khat_below_k(r in 1.0f64..200.0, t in 1e-2f64..1e2) {
            let p = NetworkParams::default();
            prop_assert!(kernel_khat(r, t, &p).unwrap() < kernel_k(r, t, &p).unwrap());
        }
    }
}
