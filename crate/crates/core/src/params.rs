//! Deployment parameters and unit conversions.
//!
//! Everything inside the library is SI and linear: watts, BS per square
//! metre, metres, linear SIR. The dBm / per-km² / dB forms only exist at the
//! configuration boundary.

use crate::error::{Error, Result};

/// Two-tier deployment: a tagged picocell of radius `radius` at the origin,
/// macro and pico interferers as independent PPPs outside the guard regions.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// Macro BS transmit power, W.
    pub p_macro: f64,
    /// Pico BS transmit power, W.
    pub p_pico: f64,
    /// Macro BS density, per m².
    pub lambda_macro: f64,
    /// Pico BS density, per m².
    pub lambda_pico: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Edge reuse factor (number of edge sub-bands).
    pub delta: u32,
    /// SFR edge power boost.
    pub beta: f64,
    /// Picocell radius, m.
    pub radius: f64,
    /// Guard radius seen by pico interferers, m.
    pub guard_pico: f64,
    /// Guard radius seen by macro interferers, m.
    pub guard_macro: f64,
}

impl Default for NetworkParams {
    /// The reference FFR deployment: 46/30 dBm, 0.385 and 1.155 BS/km²,
    /// δ = 3, α = 4, R = 200 m, β = 2, default guard radii.
    fn default() -> Self {
        NetworkParams::new(
            dbm_to_watts(46.0),
            dbm_to_watts(30.0),
            per_km2_to_per_m2(0.385),
            per_km2_to_per_m2(1.155),
            4.0,
            3,
            2.0,
            200.0,
        )
    }
}

impl NetworkParams {
    /// Builds a parameter set with the default guard radii
    /// `Rg_p = R` and `Rg_m = (P_m/P_p)^{1/α} R`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p_macro: f64,
        p_pico: f64,
        lambda_macro: f64,
        lambda_pico: f64,
        alpha: f64,
        delta: u32,
        beta: f64,
        radius: f64,
    ) -> Self {
        let mut p = NetworkParams {
            p_macro,
            p_pico,
            lambda_macro,
            lambda_pico,
            alpha,
            delta,
            beta,
            radius,
            guard_pico: 0.0,
            guard_macro: 0.0,
        };
        p.reset_guards();
        p
    }

    /// Parameter set used for the SFR study: the reference deployment with
    /// α = 3.2.
    pub fn sfr_reference() -> Self {
        NetworkParams::default().with_alpha(3.2)
    }

    /// Recomputes both guard radii from the current powers, exponent and radius.
    pub fn reset_guards(&mut self) {
        self.guard_pico = self.radius;
        self.guard_macro = (self.p_macro / self.p_pico).powf(1.0 / self.alpha) * self.radius;
    }

    /// Copy with a new path-loss exponent; guard radii follow.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.reset_guards();
        self
    }

    pub fn with_densities(mut self, lambda_macro: f64, lambda_pico: f64) -> Self {
        self.lambda_macro = lambda_macro;
        self.lambda_pico = lambda_pico;
        self
    }

    pub fn with_delta(mut self, delta: u32) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// P_m / P_p.
    pub fn power_ratio(&self) -> f64 {
        self.p_macro / self.p_pico
    }

    pub fn delta_f64(&self) -> f64 {
        f64::from(self.delta)
    }

    /// Exclusion radius around a user at distance `r` from the pico BS for
    /// pico interferers: `R + Rg_p - r`.
    pub fn pico_exclusion(&self, r: f64) -> f64 {
        self.radius + self.guard_pico - r
    }

    /// Same for macro interferers: `R + Rg_m - r`.
    pub fn macro_exclusion(&self, r: f64) -> f64 {
        self.radius + self.guard_macro - r
    }

    /// FNV-1a over the bit patterns of every field; stable across runs and
    /// platforms, used to tag curves.
    pub fn fingerprint(&self) -> u64 {
        let words = [
            self.p_macro.to_bits(),
            self.p_pico.to_bits(),
            self.lambda_macro.to_bits(),
            self.lambda_pico.to_bits(),
            self.alpha.to_bits(),
            u64::from(self.delta),
            self.beta.to_bits(),
            self.radius.to_bits(),
            self.guard_pico.to_bits(),
            self.guard_macro.to_bits(),
        ];
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for w in words {
            for byte in w.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    /// Lists every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = [
            ("p_macro", self.p_macro),
            ("p_pico", self.p_pico),
            ("lambda_macro", self.lambda_macro),
            ("lambda_pico", self.lambda_pico),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("radius", self.radius),
            ("guard_pico", self.guard_pico),
            ("guard_macro", self.guard_macro),
        ];
        for (name, x) in finite {
            if !x.is_finite() {
                v.push(format!("{name} must be finite"));
            }
        }
        if !(self.alpha > 2.0) {
            v.push("α > 2 required".to_string());
        }
        if !(self.p_pico > 0.0) {
            v.push("P_p > 0 required".to_string());
        }
        if !(self.p_macro > self.p_pico) {
            v.push("P_m > P_p required".to_string());
        }
        if !(self.lambda_macro >= 0.0) {
            v.push("λ_m ≥ 0 required".to_string());
        }
        if !(self.lambda_pico >= 0.0) {
            v.push("λ_p ≥ 0 required".to_string());
        }
        if self.delta < 1 {
            v.push("δ ≥ 1 required".to_string());
        }
        if !(self.beta >= 1.0) {
            v.push("β ≥ 1 required".to_string());
        }
        if !(self.radius > 0.0) {
            v.push("R > 0 required".to_string());
        }
        if !(self.guard_pico >= 0.0) {
            v.push("Rg_p ≥ 0 required".to_string());
        }
        if !(self.guard_macro >= 0.0) {
            v.push("Rg_m ≥ 0 required".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// Warns when the picocells are not sparse (λ_p π R² ≥ 1), where the
    /// no-boundary-interferer approximation stops being reasonable.
    pub fn sparsity_warning(&self) -> Option<String> {
        let load = self.lambda_pico * std::f64::consts::PI * self.radius * self.radius;
        (load >= 1.0).then(|| format!("pico tier is not sparse: λ_p·π·R² = {load:.3} ≥ 1"))
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn per_km2_to_per_m2(x: f64) -> f64 {
    x * 1e-6
}

pub fn per_m2_to_per_km2(x: f64) -> f64 {
    x * 1e6
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
