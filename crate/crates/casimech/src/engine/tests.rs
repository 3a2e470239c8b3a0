use super::*;
use crate::model::{dimensionless_system, DriveProfile, InitialState, Thermal};
use crate::numeric::quad::integrate;

fn sys(modes: usize, omega: f64, state: InitialState, drives: Vec<DriveProfile>) -> SystemConfig {
    dimensionless_system(modes, omega, 1e-3, state, drives).unwrap()
}

fn secs(cfg: &SystemConfig, tt: f64) -> f64 {
    cfg.seconds(tt)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn classification_examples() {
    let sp = Spectrum::massless(8);
    assert_eq!(classify_resonance_with(&sp, 2.0, 1e-6), ResonanceKind::Degenerate(1));
    assert_eq!(classify_resonance_with(&sp, 3.0, 1e-6), ResonanceKind::Nondegenerate(1, 2));
    assert_eq!(classify_resonance_with(&sp, 1.0, 1e-6), ResonanceKind::ModeMixing(2, 1));
    assert_eq!(classify_resonance_with(&sp, 2.5, 1e-6), ResonanceKind::OffResonant);
    // 4 = 2·2 wins over 1 + 3
    assert_eq!(classify_resonance_with(&sp, 4.0, 1e-6), ResonanceKind::Degenerate(2));
}

#[test]
fn wall_at_rest_initially() {
    let d = vec![DriveProfile::exdr(Target::Mechanical, 0.7, 50.0)];
    let cfg = sys(4, 2.0, InitialState::default(), d);
    for order in 0..=3 {
        let p = wall_position(&cfg, 0.0, order, Approximation::Full).unwrap();
        assert!((p.x_total - cfg.cavity.length).abs() < 1e-24);
        assert_eq!(p.gamma_k, 1.0);
    }
    let p = wall_position(&cfg, secs(&cfg, 3.0), 0, Approximation::Full).unwrap();
    assert_eq!(p.x_total, cfg.cavity.length);
}

#[test]
fn second_order_wall_matches_quadrature() {
    let state = InitialState { mu_k: 1.0, mu_kp: 0.4, kp: 3, beta_mag: 0.5, ..Default::default() };
    let cfg = sys(4, 2.3, state, vec![]);
    let tt = 4.0;
    let p = wall_position(&cfg, secs(&cfg, tt), 2, Approximation::Full).unwrap();
    let phi = |s: f64| 2.0 * (-(1.0 * s).cos() * 1.0) + 2.0 * (-(3f64).sqrt() * 0.4 * (3.0 * s).cos());
    let brute = integrate(|s| phi(s).powi(2) * (2.3 * (tt - s)).sin(), 0.0, tt, 1e-12, 0.0).unwrap();
    assert!((p.x2_tilde - brute).abs() < 1e-10, "{} {}", p.x2_tilde, brute);
}

#[test]
fn resonant_wall_tracks_full_expression() {
    let state = InitialState { mu_k: 1.0, ..Default::default() };
    let cfg = sys(6, 2.0, state, vec![]);
    let tt = 40.0;
    let full = wall_position(&cfg, secs(&cfg, tt), 2, Approximation::Full).unwrap().x2_tilde;
    let res = wall_position(&cfg, secs(&cfg, tt), 2, Approximation::Resonant).unwrap().x2_tilde;
    // the secular amplitude is ω_k t; the neglected pieces are O(1)
    assert!((full - res).abs() < 0.1 * tt, "{full} {res}");
}

#[test]
fn first_order_photon_closed_form_and_quadrature_agree() {
    let state = InitialState { mu_k: 0.8, mu_kp: 0.3, beta_mag: 1.2, theta: 0.4, ..Default::default() };
    let d = vec![
        DriveProfile::exdr(Target::Mechanical, 0.5, 40.0),
        DriveProfile::exdr(Target::ModeK, -0.3, 30.0),
    ];
    let cfg = sys(4, 2.7, state, d);
    let tt = 6.0;
    let exact = photon_number(&cfg, 1, secs(&cfg, tt), 1, Approximation::Full).unwrap();
    let quad = first_order_by_quadrature(&cfg, 1, tt, NumberBreakdown::default()).unwrap();
    assert!((exact.order1 - quad.order1).abs() < 1e-8 * exact.order1.abs().max(1.0));
}

#[test]
fn vacuum_closed_form_equals_double_commutator() {
    let state = InitialState {
        beta_mag: 0.9,
        theta: 0.7,
        squeeze_r: 0.3,
        squeeze_phi: 1.1,
        thermal: Thermal::Occupation(0.4),
        ..Default::default()
    };
    let d = vec![DriveProfile::exdr(Target::Mechanical, 0.6, 35.0)];
    for omega in [2.0, 2.37] {
        let cfg = sys(5, omega, state.clone(), d.clone());
        let f = Fields::new(&cfg).unwrap();
        for k in [1, 2] {
            let tt = 7.5;
            let b = photon_number(&cfg, k, secs(&cfg, tt), 2, Approximation::Full).unwrap();
            let general = f.nk2(k, tt);
            assert!((b.order2 - general).abs() < 1e-9 * general.abs().max(1.0), "{} {}", b.order2, general);
            assert_eq!(b.n_coherent, 0.0);
        }
    }
}

#[test]
fn dce_ratio_approaches_one() {
    let state = InitialState { beta_mag: 1.0, ..Default::default() };
    let cfg = sys(8, 2.0, state, vec![]);
    for tt in [50.0, 100.0] {
        let b = photon_number(&cfg, 1, secs(&cfg, tt), 2, Approximation::Full).unwrap();
        assert!((b.n_beta / (tt * tt) - 1.0).abs() < 0.02, "{}", b.n_beta / (tt * tt));
    }
}

#[test]
fn resonant_subterms() {
    let state = InitialState {
        beta_mag: 1.3,
        theta: 0.3,
        squeeze_r: 0.2,
        thermal: Thermal::Occupation(0.5),
        ..Default::default()
    };
    let d = vec![DriveProfile::exdr(Target::Mechanical, 0.4, 60.0)];
    let cfg = sys(4, 2.0, state, d);
    let tt = 20.0;
    let b = photon_number(&cfg, 1, secs(&cfg, tt), 2, Approximation::Resonant).unwrap();
    let x = tt * tt;
    assert!(rel(b.n_beta, 1.69 * x) < 1e-14);
    let s2 = 0.2f64.sinh().powi(2);
    assert!(rel(b.n_sq + b.n_t + b.n_sqt, x * (s2 + 0.5 + s2)) < 1e-14);
    assert!(rel(b.n_md, 0.4 * x / 4.0 * (4.0 * 1.3 * 0.3f64.sin() + 0.4)) < 1e-14);
    for v in [b.n_beta, b.n_sq, b.n_t, b.n_sqt, b.n_md, b.n_vac] {
        assert!(v >= -1e-12);
    }
}

#[test]
fn full_phonon_loss_tracks_resonant_form() {
    let state = InitialState { beta_mag: 1.0, ..Default::default() };
    let cfg = sys(8, 2.0, state, vec![]);
    let tt = 60.0;
    let full = phonon_number(&cfg, secs(&cfg, tt), 2, Approximation::Full).unwrap();
    let res = phonon_number(&cfg, secs(&cfg, tt), 2, Approximation::Resonant).unwrap();
    assert!(rel(full.order2, res.order2) < 0.05, "{} {}", full.order2, res.order2);
}

#[test]
fn first_order_exchange_conserves_excitations() {
    let state = InitialState { mu_k: 1.0, beta_mag: 0.8, theta: PI / 2.0, ..Default::default() };
    let cfg = sys(4, 2.0, state, vec![]);
    let t = secs(&cfg, 12.0);
    let n = photon_number(&cfg, 1, t, 1, Approximation::Resonant).unwrap();
    let b = phonon_number(&cfg, t, 1, Approximation::Resonant).unwrap();
    assert!((b.order1 + 0.5 * n.order1).abs() < 1e-14);
}

#[test]
fn gamma_small_argument_bound() {
    let cfg = sys(4, 2.0, InitialState::default(), vec![]);
    for frac in [0.01, 0.1, 0.3, 0.45] {
        let t = frac * cfg.critical_time();
        let p = wall_position(&cfg, t, 3, Approximation::Resonant).unwrap();
        let x = (cfg.epsilon() * cfg.tilde_time(t)).powi(2);
        assert!((p.gamma_k - (-x / 4.0).exp()).abs() <= x * x / 32.0);
        assert!(p.gamma_k > 0.0 && p.gamma_k <= 1.0);
    }
}

#[test]
fn suppression_by_drive() {
    for n in [0i32, 1, 2, -1] {
        let theta = (n as f64 + 0.5) * PI;
        let state = InitialState { beta_mag: 1.0, theta, ..Default::default() };
        let g = -2.0 * (-1f64).powi(n) * 1.0;
        let cfg = sys(4, 2.0, state, vec![DriveProfile::exdr(Target::Mechanical, g, 60.0)]);
        for tt in [3.0, 17.0, 40.0] {
            let x = wall_position_combined(&cfg, secs(&cfg, tt), ThetaFamily::ImagBeta).unwrap().x;
            assert!((x - cfg.cavity.length).abs() <= 1e-12 * cfg.cavity.length);
        }
        assert!(wall_position_combined(&cfg, 0.0, ThetaFamily::RealBeta).is_err());
    }
}

#[test]
fn damping_time_reported_for_negative_phase() {
    let state = InitialState { mu_k: 1.0, beta_mag: 2.0, theta: -PI / 2.0, ..Default::default() };
    let cfg = sys(4, 2.0, state, vec![]);
    let r = wall_position_combined(&cfg, 0.0, ThetaFamily::ImagBeta).unwrap();
    let expected = cfg.seconds(4.0 / (2.0 * 1.0 * 1.0) / cfg.epsilon());
    assert!(rel(r.damping_time.unwrap(), expected) < 1e-14);
}

#[test]
fn averages_match_closed_forms() {
    let state = InitialState { mu_k: 0.7, beta_mag: 1.1, theta: 0.9, squeeze_r: 0.25, ..Default::default() };
    let d = vec![DriveProfile::exdr(Target::Mechanical, 0.3, 80.0)];
    let cfg = sys(4, 2.0, state, d);
    let tau = secs(&cfg, 100.0);
    let avg = time_average(
        |t| photon_number(&cfg, 1, t, 2, Approximation::Resonant).unwrap().order2,
        tau,
        4,
    )
    .unwrap();
    assert!(rel(avg, avg_nk2(&cfg, tau).unwrap()) < 1e-9);
    let avg = time_average(
        |t| wall_position(&cfg, t, 2, Approximation::Resonant).unwrap().x2_tilde,
        tau,
        50,
    )
    .unwrap();
    // the closed form drops a term of relative size 1/(4ω_kτ)
    assert!((avg - avg_x2(&cfg, tau)).abs() < 0.49 / 400.0 * 1.01);
    assert!(time_average(|_| 2.5, 1.0, 1).unwrap() == 2.5);
}

#[test]
fn nondegenerate_forms() {
    let state = InitialState { mu_k: 0.0, mu_kp: 1.0, beta_mag: 1.0, theta: PI / 2.0, ..Default::default() };
    let cfg = sys(4, 3.0, state, vec![]);
    let t = secs(&cfg, 10.0);
    let r = photon_number_nondegenerate(&cfg, 1, 2, t).unwrap();
    assert_eq!(r.order1, 0.0);
    assert!(rel(r.order2_average, 1.0 * 2.0 * 100.0 / 3.0) < 1e-13);
    let cfg2 = sys(4, 2.0, InitialState::default(), vec![]);
    assert!(photon_number_nondegenerate(&cfg2, 1, 2, t).is_err());
}

#[test]
fn resonance_scan_peaks() {
    let sp = Spectrum::massless(8);
    for tt in [30.0, 50.0, 100.0] {
        for peak in [2.0, 3.0, 4.0, 5.0] {
            let f = |w: f64| delta_n_beta(&sp, 1, w, tt);
            let c = f(peak);
            assert!(c > f(peak - 0.005) && c > f(peak + 0.005), "t̃={tt} ω̃={peak}");
        }
        assert!(delta_n_beta(&sp, 1, 2.0, tt) > 100.0 * delta_n_beta(&sp, 1, 1.5, tt) || tt < 100.0);
    }
}

#[test]
fn interference_pattern() {
    let n0: f64 = 2.0;
    let tt: f64 = 10.0;
    for i in 0..=16 {
        let theta = -PI + 2.0 * PI * i as f64 / 16.0;
        let b = (n0 / 2.0).sqrt() / tt;
        let g = 2.0 * b;
        let state = InitialState { beta_mag: b, theta, ..Default::default() };
        let cfg = sys(4, 2.0, state, vec![DriveProfile::exdr(Target::Mechanical, g, 60.0)]);
        let n = photon_number(&cfg, 1, secs(&cfg, tt), 2, Approximation::Resonant).unwrap().order2;
        assert!((n / n0 - (1.0 + theta.sin())).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_requests() {
    let cfg = sys(4, 2.5, InitialState::default(), vec![]);
    assert!(photon_number(&cfg, 5, 0.0, 0, Approximation::Full).is_err());
    assert!(photon_number(&cfg, 1, 0.0, 3, Approximation::Full).is_err());
    assert!(photon_number(&cfg, 1, 1e-15, 2, Approximation::Resonant).is_err());
    let d = vec![DriveProfile::exdr(Target::ModeK, 0.1, 30.0)];
    let cfg = sys(4, 2.0, InitialState::default(), d);
    assert!(wall_position(&cfg, 0.0, 2, Approximation::Full).is_err());
    assert!(photon_number(&cfg, 1, 0.0, 1, Approximation::Resonant).is_err());
}
