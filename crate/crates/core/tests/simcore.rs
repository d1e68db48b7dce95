use std::f64::consts::PI;

use hetnet_core::analytic::{self, AnalyticOptions, PicoBand, PicoScheme, SchemeKind, Target};
use hetnet_core::params::{db_to_linear, NetworkParams};
use hetnet_core::simcore::{
    estimate_cp, estimate_cp_batch, estimate_rate, estimate_rate_with, sample_realization,
    sample_realization_at, sir_mu, sir_pu, Interferer, MacroBand, McConfig, Realization, SimMode,
};
use hetnet_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

fn silent() -> NetworkParams {
    NetworkParams::default().with_densities(0.0, 0.0)
}

#[test]
fn empty_fields_without_base_stations() {
    let p = silent();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let real = sample_realization(&p, SimMode::Faithful, 5_000.0, &mut rng).unwrap();
    assert!(real.macros.is_empty() && real.picos.is_empty());
    assert_eq!(sir_pu(&real, PicoBand::FfrCentre, &p, SimMode::Faithful).unwrap(), f64::INFINITY);

    let cfg = McConfig::default().with_trials(2_000);
    for band in PicoBand::ALL {
        let e = estimate_cp(&Target::Band(band), db_to_linear(20.0), &p, &cfg).unwrap();
        assert_eq!((e.mean, e.ci_halfwidth), (1.0, 0.0), "{band:?}");
    }
}

#[test]
fn truncation_inside_guard_is_rejected() {
    let p = NetworkParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!(sample_realization(&p, SimMode::Faithful, 600.0, &mut rng).is_err());
    let cfg = McConfig::default().with_truncation(600.0);
    assert!(matches!(
        estimate_cp(&Target::Band(PicoBand::FfrEdge), 1.0, &p, &cfg),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn faithful_field_counts_and_fading() {
    let p = NetworkParams::default();
    let (r, trunc) = (120.0, 5_000.0);
    let draws = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut macros, mut picos) = (0usize, 0usize);
    let mut fades = 0.0;
    let mut fade_n = 0usize;
    for _ in 0..draws {
        let real = sample_realization_at(&p, SimMode::Faithful, r, trunc, &mut rng);
        macros += real.macros.len();
        picos += real.picos.len();
        for x in real.macros.iter().chain(&real.picos) {
            assert!(x.fading > 0.0);
            fades += x.fading;
        }
        fade_n += real.macros.len() + real.picos.len();
        let dm = p.macro_exclusion(r);
        assert!(real.macros.iter().all(|m| m.distance > dm && m.distance < trunc));
        assert!(real.picos.iter().all(|m| m.distance > p.pico_exclusion(r)));
    }
    let n = draws as f64;
    let want_m = p.lambda_macro * PI * (trunc * trunc - p.macro_exclusion(r).powi(2));
    let want_p = p.lambda_pico * PI * (trunc * trunc - p.pico_exclusion(r).powi(2));
    assert!((macros as f64 / n - want_m).abs() < 3.0 * (want_m / n).sqrt(), "{} vs {want_m}", macros as f64 / n);
    assert!((picos as f64 / n - want_p).abs() < 3.0 * (want_p / n).sqrt(), "{} vs {want_p}", picos as f64 / n);
    let mean_fade = fades / fade_n as f64;
    assert!((mean_fade - 1.0).abs() < 5.0 / (fade_n as f64).sqrt(), "{mean_fade}");
}

#[test]
fn nearest_macro_distance_follows_null_probability() {
    // F(q) = 1 - exp(-λ_m π (q² - q₀²)) on q ≥ q₀; Kolmogorov–Smirnov at 99%.
    let p = NetworkParams::default();
    let r = 60.0;
    let q0 = p.macro_exclusion(r);
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut qs: Vec<f64> = (0..n)
        .map(|_| {
            let real = sample_realization_at(&p, SimMode::Faithful, r, 10_000.0, &mut rng);
            real.nearest_macro_distance().unwrap()
        })
        .collect();
    qs.sort_by(f64::total_cmp);
    let cdf = |q: f64| 1.0 - (-p.lambda_macro * PI * (q * q - q0 * q0)).exp();
    let nf = n as f64;
    let ks = qs
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let f = cdf(q);
            (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.628 / nf.sqrt(), "KS statistic {ks}");
}

#[test]
fn single_interferer_sir() {
    let p = NetworkParams::default();
    let (r, g, d, h) = (80.0, 1.3, 900.0, 0.7);
    let real = Realization::new(r, g, vec![Interferer::new(d, h, 0, p.alpha)], vec![]);
    let want = p.p_pico * r.powf(-p.alpha) * g / (p.p_macro * d.powf(-p.alpha) * h);
    let got = sir_pu(&real, PicoBand::FfrCentre, &p, SimMode::Faithful).unwrap();
    assert!((got / want - 1.0).abs() < 1e-12);
    assert_eq!(sir_pu(&real, PicoBand::FfrEdge, &p, SimMode::Faithful).unwrap(), got);
    // The only macro is the nearest one, silent on a neighbour's edge band.
    assert_eq!(sir_pu(&real, PicoBand::FfrNeighbourEdge, &p, SimMode::Faithful).unwrap(), f64::INFINITY);

    let zero = Realization::new(0.0, g, vec![], vec![]);
    assert!(sir_pu(&zero, PicoBand::FfrCentre, &p, SimMode::Faithful).is_err());
}

#[test]
fn boosted_edge_band_never_helps() {
    let p = NetworkParams::sfr_reference();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for mode in [SimMode::Faithful, SimMode::Physical] {
        for _ in 0..200 {
            let real = sample_realization(&p, mode, 8_000.0, &mut rng).unwrap();
            let c = sir_pu(&real, PicoBand::SfrCentre, &p, mode).unwrap();
            let e = sir_pu(&real, PicoBand::SfrEdge, &p, mode).unwrap();
            if mode == SimMode::Faithful {
                assert!(e <= c);
            }
            assert!(e > 0.0 && c > 0.0);
        }
    }
}

#[test]
fn macro_user_sir_without_picos_is_single_tier() {
    let p = NetworkParams::default();
    let real = Realization::new(
        300.0,
        1.0,
        vec![Interferer::new(700.0, 1.0, 0, 4.0), Interferer::new(900.0, 2.0, 2, 4.0)],
        vec![Interferer::new(250.0, 1.0, 0, 4.0)],
    );
    let centre = sir_mu(&real, MacroBand::Centre { picos: false }, &p).unwrap();
    let want = 300f64.powi(-4) / (700f64.powi(-4) + 2.0 * 900f64.powi(-4));
    assert!((centre / want - 1.0).abs() < 1e-12);
    let edge = sir_mu(&real, MacroBand::Edge { picos: false }, &p).unwrap();
    assert!((edge / (700f64 / 300.0).powi(4) - 1.0).abs() < 1e-12);
    assert!(sir_mu(&real, MacroBand::Edge { picos: true }, &p).unwrap() < edge);
}

#[test]
fn macro_user_reuse_one_coverage() {
    // P[η_m > 1] = 1/(1 + π/4) with a single tier at α = 4.
    let p = NetworkParams::default().with_densities(0.385e-6, 0.0);
    let all = Target::MuCentreNoPico { s_tm: 1e-12 };
    let cfg = McConfig::default().with_trials(200_000).with_seed(9);
    let e = estimate_cp(&all, 1.0, &p, &cfg).unwrap();
    let want = 1.0 / (1.0 + PI / 4.0);
    assert!((e.mean - want).abs() <= 3.0 * e.ci_halfwidth, "{} ± {} vs {want}", e.mean, e.ci_halfwidth);
}

#[test]
fn dense_picos_hurt_macro_edge_users() {
    let p = NetworkParams::default().with_densities(0.385e-6, 2e-5);
    let s_tm = 1.0;
    let cfg = McConfig::default().with_trials(20_000).with_truncation(6_000.0);
    let est = estimate_cp_batch(&[Target::MuEdgeNoPico { s_tm }, Target::MuEdgePs2 { s_tm }], &[1.0], &p, &cfg).unwrap();
    let (none, ps2) = (est[0][0], est[1][0]);
    assert!(ps2.mean < none.mean - 3.0 * (none.ci_halfwidth + ps2.ci_halfwidth));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let p = NetworkParams::default();
    let targets = [
        Target::Band(PicoBand::FfrNeighbourEdge),
        Target::Scheme(PicoScheme::new(SchemeKind::Ps1, 2.0).unwrap()),
        Target::MuEdgePs2 { s_tm: 1.0 },
    ];
    let ts = [0.1, 1.0, 10.0];
    let base = McConfig::default().with_trials(3_000).with_seed(42).with_truncation(8_000.0);
    let one = estimate_cp_batch(&targets, &ts, &p, &base.clone().with_workers(1)).unwrap();
    let three = estimate_cp_batch(&targets, &ts, &p, &base.clone().with_workers(3)).unwrap();
    assert_eq!(one, three);
    let r1 = estimate_rate(&targets[1], &p, &base.clone().with_workers(1)).unwrap();
    let r3 = estimate_rate(&targets[1], &p, &base.with_workers(3)).unwrap();
    assert_eq!(r1.mean.to_bits(), r3.mean.to_bits());
}

#[test]
fn seed_changes_the_sample() {
    let p = NetworkParams::default();
    let t = Target::Band(PicoBand::FfrCentre);
    let cfg = McConfig::default().with_trials(2_000).with_truncation(8_000.0);
    let a = estimate_cp(&t, 10.0, &p, &cfg.clone().with_seed(1)).unwrap();
    let b = estimate_cp(&t, 10.0, &p, &cfg.with_seed(2)).unwrap();
    assert_ne!(a.mean, b.mean);
}

#[test]
fn golden_ffr_centre_estimate() {
    // Regression pin for seed 1, 20 000 trials, default truncation; the
    // analytic value at 0 dB is 0.89807.
    let p = NetworkParams::default();
    let cfg = McConfig::default().with_trials(20_000);
    let e = estimate_cp(&Target::Band(PicoBand::FfrCentre), 1.0, &p, &cfg).unwrap();
    assert_eq!(e.effective, 20_000);
    assert_eq!((e.mean * 20_000.0).round() as u64, GOLDEN_FFR_CENTRE_HITS);
    let a = analytic::cp_ffr_centre(1.0, &p).unwrap();
    assert!((e.mean - a).abs() <= (3.0 * e.ci_halfwidth).max(0.01));
}

const GOLDEN_FFR_CENTRE_HITS: u64 = 17_969;

#[test]
fn synthetic_exponential_rate() {
    // E[ln(1 + X)] = e·E₁(1) for X ~ Exp(1).
    let cfg = McConfig::default().with_trials(400_000).with_seed(4);
    let e = estimate_rate_with(|rng| Exp1.sample(rng), &cfg).unwrap();
    let want = 0.596_347_362_323_194_1;
    assert!((e.mean - want).abs() <= 3.0 * e.ci_halfwidth, "{} ± {}", e.mean, e.ci_halfwidth);
    assert!(matches!(
        estimate_rate_with(|_| f64::INFINITY, &cfg.with_trials(10)),
        Err(Error::RateDivergence(_))
    ));
}

#[test]
fn rate_without_interferers_diverges() {
    let cfg = McConfig::default().with_trials(100);
    let e = estimate_rate(&Target::Band(PicoBand::FfrCentre), &silent(), &cfg).unwrap_err();
    assert!(matches!(e, Error::RateDivergence(ref m) if m.contains("nonzero")), "{e}");
}

#[test]
fn ps1_rate_matches_analytic() {
    let p = NetworkParams::default();
    let s_tp = db_to_linear(3.0);
    let target = Target::Scheme(PicoScheme::new(SchemeKind::Ps1, s_tp).unwrap());
    let cfg = McConfig::default().with_trials(30_000).with_seed(6);
    let mc = estimate_rate(&target, &p, &cfg).unwrap();
    let a = analytic::avg_rate(|t| analytic::cp(&target, t, &p, AnalyticOptions::default())).unwrap();
    assert!((mc.mean - a).abs() <= (3.0 * mc.ci_halfwidth).max(0.02), "{} ± {} vs {a}", mc.mean, mc.ci_halfwidth);
}

#[test]
fn physical_mode_bounds_faithful_for_pico_users() {
    let p = NetworkParams::default();
    let s_tp = db_to_linear(3.0);
    let targets = [
        Target::Band(PicoBand::FfrCentre),
        Target::Band(PicoBand::FfrEdge),
        Target::Band(PicoBand::FfrNeighbourEdge),
        Target::Band(PicoBand::SfrCentre),
        Target::Band(PicoBand::SfrEdge),
        Target::Scheme(PicoScheme::new(SchemeKind::Ps1, s_tp).unwrap()),
        Target::Scheme(PicoScheme::new(SchemeKind::Ps2, s_tp).unwrap()),
    ];
    let ts: Vec<f64> = [-10.0, 0.0, 10.0, 20.0].iter().map(|&d| db_to_linear(d)).collect();
    let cfg = McConfig::default().with_trials(8_000).with_seed(8);
    let faithful = estimate_cp_batch(&targets, &ts, &p, &cfg).unwrap();
    let physical = estimate_cp_batch(&targets, &ts, &p, &cfg.with_mode(SimMode::Physical)).unwrap();
    for (j, t) in targets.iter().enumerate() {
        for k in 0..ts.len() {
            let (f, ph) = (faithful[j][k], physical[j][k]);
            assert!(ph.mean >= f.mean - f.ci_halfwidth - ph.ci_halfwidth, "{} at {}: {} < {}", t.label(), ts[k], ph.mean, f.mean);
        }
    }
}
