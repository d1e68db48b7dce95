//! One-dimensional quadrature and root bracketing.
//!
//! The integrator is a globally adaptive 7/15-point Gauss–Kronrod scheme in
//! the QUADPACK style: the interval with the largest error estimate is
//! bisected until the summed estimate meets the tolerance.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::params::NetworkParams;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(domain(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite(x))
        }
    };

    let fc = eval(centre)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut f1 = [0.0; 7];
    let mut f2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = eval(centre - dx)?;
        let hi = eval(centre + dx)?;
        f1[j] = lo;
        f2[j] = hi;
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }

    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }

    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

/// Adaptive integration of a fallible integrand over `[a, b]`.
pub fn try_integrate_finite<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(domain(format!("integration limits must satisfy a ≤ b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_error: 0.0 });
    }

    let mut segments = vec![gk15(&mut f, a, b)?];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !(value.is_finite() && error.is_finite()) {
            return Err(Error::Divergence(format!("partial sums overflow on [{a}, {b}]")));
        }
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(Quadrature { value, abs_error: error });
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::SubdivisionLimit {
                limit: spec.max_subdivisions,
                value,
                error,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval cannot be split further in floating point.
            return Err(Error::SubdivisionLimit {
                limit: segments.len() + 1,
                value,
                error,
            });
        }
        segments.push(gk15(&mut f, seg.a, mid)?);
        segments.push(gk15(&mut f, mid, seg.b)?);
    }
}

pub fn integrate_finite<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    try_integrate_finite(|x| Ok(f(x)), a, b, spec)
}

/// `∫_a^∞ f(x) dx` through `x = a + s(1-u)/u`, `u ∈ (0, 1]`, where `s`
/// is the natural length scale of the integrand.
pub fn try_integrate_semiinf_scaled<F>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(domain(format!("scale must be positive, got {scale}")));
    }
    let mapped = |u: f64| -> Result<f64> {
        let x = a + scale * (1.0 - u) / u;
        if x == f64::INFINITY {
            return Ok(0.0);
        }
        Ok(f(x)? * (scale / u) / u)
    };
    match try_integrate_finite(mapped, 0.0, 1.0, spec) {
        Err(Error::SubdivisionLimit { value, error, .. }) => Err(Error::Divergence(format!(
            "tail refinement did not stabilise (value {value:e}, error {error:e})"
        ))),
        other => other,
    }
}

pub fn try_integrate_semiinf<F>(f: F, a: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_semiinf_scaled(f, a, 1.0, spec)
}

/// `∫_a^∞ f(x) dx` via `u = 1/(1 + x - a)`.
pub fn integrate_semiinf<F>(f: F, a: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    try_integrate_semiinf(|x| Ok(f(x)), a, spec)
}

/// `E_q[g(q)]` for the distance `q` from a user at distance `r` from the
/// pico BS to the nearest macro BS, whose density is
/// `2πλ_m q exp(-λ_m π (q² - q₀²))` on `q ≥ q₀ = Rg_m + R - r`.
///
/// Integrated in `v = λ_m π (q² - q₀²)`, which turns the density into `e^{-v}`.
pub fn try_expect_q<G>(mut g: G, r: f64, p: &NetworkParams, spec: &QuadratureSpec) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(r > 0.0 && r <= p.radius) {
        return Err(domain(format!("user distance must lie in (0, {}], got {r}", p.radius)));
    }
    if !(p.lambda_macro > 0.0) {
        return Err(domain("nearest-macro distance is undefined without macro BSs"));
    }
    let q0 = p.macro_exclusion(r);
    let scale = PI * p.lambda_macro;
    let q = try_integrate_semiinf(
        |v| {
            let q = (q0 * q0 + v / scale).sqrt();
            Ok(g(q)? * (-v).exp())
        },
        0.0,
        spec,
    )?;
    Ok(q.value)
}

pub fn expect_q<G>(g: G, r: f64, p: &NetworkParams) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    try_expect_q(|q| Ok(g(q)), r, p, &QuadratureSpec::default())
}

/// Bisection on a bracketing interval; returns the midpoint of the final
/// bracket of width `≤ tol`.
pub fn try_bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(domain(format!("bisection needs lo ≤ hi and tol > 0, got [{lo}, {hi}], {tol}")));
    }
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_bisect(|x| Ok(f(x)), lo, hi, tol)
}
