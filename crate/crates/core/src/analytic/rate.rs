use super::pico::{cp_ffr_centre, cp_ffr_edge, cp_ps1, cp_ps2};
use super::SchemeKind;
use crate::error::{domain, Error, Result};
use crate::numerics::{try_bisect, try_integrate_finite, QuadratureSpec};
use crate::params::{db_to_linear, NetworkParams};
use crate::specfun::rho;

const RATE_CUTOFF: f64 = 1e-10;
const RATE_T_CAP: f64 = 50.0;
const RATE_SCAN_STEP: f64 = 0.25;

/// `S_tp` search bracket in dB.
pub const STP_BRACKET_DB: (f64, f64) = (-40.0, 60.0);
const STP_TOL_DB: f64 = 1e-3;

/// Average rate in nats/s/Hz, `∫_0^∞ P[SIR > e^t - 1] dt`, from a CP
/// function of the linear threshold.
///
/// The upper limit is the first point of a 0.25-nat scan where the integrand
/// drops below 1e-10; if that does not happen by 50 nats the rate is
/// reported as divergent.
pub fn avg_rate<F>(mut cp: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut upper: f64 = 0.0;
    loop {
        let v = cp(upper.exp_m1())?;
        if v < RATE_CUTOFF {
            break;
        }
        if upper >= RATE_T_CAP {
            return Err(Error::RateDivergence(format!(
                "P[SIR > e^t - 1] = {v:e} at t = {RATE_T_CAP}; the coverage curve does not decay"
            )));
        }
        upper += RATE_SCAN_STEP;
    }
    let spec = QuadratureSpec {
        rel_tol: 1e-7,
        abs_tol: 1e-9,
        max_subdivisions: 2000,
    };
    Ok(try_integrate_finite(|t| cp(t.exp_m1()), 0.0, upper, &spec)?.value)
}

/// Sub-band split between cell-centre and cell-edge macro users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandAllocation {
    /// `N_c / N_t`.
    pub frac_centre: f64,
    /// `N_e / N_t` for each of the δ edge bands.
    pub frac_edge: f64,
    pub total: Option<u32>,
}

impl BandAllocation {
    pub fn with_total(mut self, n_t: u32) -> Self {
        self.total = Some(n_t);
        self
    }

    /// `(N_c, N_e)` when a total is known.
    pub fn subbands(&self) -> Option<(f64, f64)> {
        self.total.map(|n| {
            let n = f64::from(n);
            (self.frac_centre * n, self.frac_edge * n)
        })
    }

    /// Share of the spectrum a pico running `kind` uses: PS1 takes the centre
    /// band and δ-1 neighbouring edge bands, PS2 all δ edge bands.
    pub fn scheme_share(&self, kind: SchemeKind, delta: u32) -> f64 {
        let d = f64::from(delta);
        match kind {
            SchemeKind::Ps1 => self.frac_centre + (d - 1.0) * self.frac_edge,
            SchemeKind::Ps2 => d * self.frac_edge,
        }
    }
}

/// `N_c = P[η_m > S_tm] N_t`, `N_e = (N_t - N_c)/δ`, with the reuse-1
/// macro CP `1/(1 + ρ(S_tm, 1))`.
pub fn band_allocation(s_tm: f64, p: &NetworkParams) -> Result<BandAllocation> {
    if !(s_tm >= 0.0) || s_tm.is_nan() {
        return Err(domain(format!("S_tm must be ≥ 0, got {s_tm}")));
    }
    p.validate()?;
    let frac_centre = if s_tm == f64::INFINITY {
        0.0
    } else {
        1.0 / (1.0 + rho(s_tm, 1.0, p.alpha)?)
    };
    Ok(BandAllocation {
        frac_centre,
        frac_edge: (1.0 - frac_centre) / p.delta_f64(),
        total: None,
    })
}

fn classifier_cp(kind: SchemeKind, t: f64, p: &NetworkParams) -> Result<f64> {
    match kind {
        SchemeKind::Ps1 => cp_ffr_centre(t, p),
        SchemeKind::Ps2 => cp_ffr_edge(t, p),
    }
}

/// Linear `S_tp` at which the classifying band's CP equals `target`
/// (FFR centre CP for PS1, own-edge CP for PS2).
pub fn solve_stp_for_target(kind: SchemeKind, target: f64, p: &NetworkParams) -> Result<f64> {
    let (lo, hi) = STP_BRACKET_DB;
    let at_lo = classifier_cp(kind, db_to_linear(lo), p)?;
    let at_hi = classifier_cp(kind, db_to_linear(hi), p)?;
    if !(target <= at_lo && target >= at_hi) {
        return Err(Error::NoBracket { target, min: at_hi, max: at_lo });
    }
    let db = try_bisect(
        |x| Ok(classifier_cp(kind, db_to_linear(x), p)? - target),
        lo,
        hi,
        STP_TOL_DB,
    )?;
    Ok(db_to_linear(db))
}

/// `S_tp` for a scheme from the macro threshold: PS1 solves
/// `P_fc(S_tp) = N_c/N_t`, PS2 solves `P_fe(S_tp) = N_e/N_t`.
pub fn solve_stp(kind: SchemeKind, s_tm: f64, p: &NetworkParams) -> Result<f64> {
    let alloc = band_allocation(s_tm, p)?;
    let target = match kind {
        SchemeKind::Ps1 => alloc.frac_centre,
        SchemeKind::Ps2 => alloc.frac_edge,
    };
    solve_stp_for_target(kind, target, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedRate {
    pub kind: SchemeKind,
    pub s_tm: f64,
    /// Linear `S_tp` used for the rate.
    pub s_tp: f64,
    /// Whether `S_tp` was clamped to the bracket because the target fraction
    /// was outside the attainable CP range.
    pub clamped: bool,
    pub allocation: BandAllocation,
    pub rate: f64,
    pub share: f64,
    pub normalized: f64,
}

/// Average rate of a scheme times the fraction of sub-bands it occupies.
pub fn normalized_rate(kind: SchemeKind, s_tm: f64, p: &NetworkParams) -> Result<NormalizedRate> {
    let allocation = band_allocation(s_tm, p)?;
    let (s_tp, clamped) = match solve_stp(kind, s_tm, p) {
        Ok(s) => (s, false),
        Err(Error::NoBracket { target, min, .. }) => {
            let (lo, hi) = STP_BRACKET_DB;
            // Below the attainable range: every threshold in the bracket
            // still covers too many users, so take the top end.
            let db = if target < min { hi } else { lo };
            (db_to_linear(db), true)
        }
        Err(e) => return Err(e),
    };
    let rate = match kind {
        SchemeKind::Ps1 => avg_rate(|t| cp_ps1(t, s_tp, p))?,
        SchemeKind::Ps2 => avg_rate(|t| cp_ps2(t, s_tp, p))?,
    };
    let share = allocation.scheme_share(kind, p.delta);
    Ok(NormalizedRate {
        kind,
        s_tm,
        s_tp,
        clamped,
        allocation,
        rate,
        share,
        normalized: rate * share,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::linear_to_db;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rate_of_zero_cp_is_zero() {
        assert_eq!(avg_rate(|_| Ok(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn rate_of_exponential_sir() {
        // e·E₁(1), mpmath.
        let v = avg_rate(|t| Ok((-t).exp())).unwrap();
        assert_relative_eq!(v, 0.596_347_362_323_194_1, max_relative = 1e-7);
    }

    #[test]
    fn rate_diverges_without_decay() {
        assert!(matches!(avg_rate(|_| Ok(1.0)), Err(Error::RateDivergence(_))));
    }

    #[test]
    fn allocation_examples() {
        let p = NetworkParams::default();
        let a = band_allocation(1.0, &p).unwrap();
        assert_relative_eq!(a.frac_centre, 1.0 / (1.0 + PI / 4.0), max_relative = 1e-13);
        assert!((a.frac_centre - 0.5601).abs() < 1e-4);
        assert_relative_eq!(a.frac_edge, (1.0 - a.frac_centre) / 3.0, max_relative = 1e-15);

        let low = band_allocation(1e-12, &p).unwrap();
        assert!(low.frac_centre > 1.0 - 1e-5 && low.frac_edge < 1e-5);
        let high = band_allocation(1e12, &p).unwrap();
        assert!(high.frac_centre < 1e-5);
        assert!((high.frac_edge - 1.0 / 3.0).abs() < 1e-5);

        let n = a.with_total(48).subbands().unwrap();
        assert_relative_eq!(n.0 + 3.0 * n.1, 48.0, max_relative = 1e-12);
    }

    #[test]
    fn scheme_shares() {
        let p = NetworkParams::default();
        let a = band_allocation(1e12, &p).unwrap();
        assert!((a.scheme_share(SchemeKind::Ps1, 3) - 2.0 / 3.0).abs() < 1e-5);
        assert!((a.scheme_share(SchemeKind::Ps2, 3) - 1.0).abs() < 1e-5);
        let b = band_allocation(2.0, &p).unwrap();
        assert_relative_eq!(b.scheme_share(SchemeKind::Ps2, 3), 1.0 - b.frac_centre, max_relative = 1e-14);
    }

    #[test]
    fn stp_round_trip_and_monotone() {
        let p = NetworkParams::default();
        let target = cp_ffr_centre(1.0, &p).unwrap();
        let s = solve_stp_for_target(SchemeKind::Ps1, target, &p).unwrap();
        assert!(linear_to_db(s).abs() < 0.01, "{}", linear_to_db(s));

        let s_hi = solve_stp_for_target(SchemeKind::Ps1, 0.3, &p).unwrap();
        let s_lo = solve_stp_for_target(SchemeKind::Ps1, 0.6, &p).unwrap();
        assert!(s_hi > s_lo);

        let e = solve_stp_for_target(SchemeKind::Ps2, 1e-12, &p).unwrap_err();
        assert!(matches!(e, Error::NoBracket { .. }));
    }

    #[test]
    fn stp_rises_with_macro_threshold() {
        let p = NetworkParams::default();
        let a = solve_stp(SchemeKind::Ps1, db_to_linear(0.0), &p).unwrap();
        let b = solve_stp(SchemeKind::Ps1, db_to_linear(6.0), &p).unwrap();
        assert!(b > a);
    }

    #[test]
    fn ps2_rate_vanishes_with_its_share() {
        let p = NetworkParams::default();
        let r = normalized_rate(SchemeKind::Ps2, 1e-6, &p).unwrap();
        assert!(r.normalized < 1e-5, "{r:?}");
    }
}
