//! Perturbative observables: wall position to third order, photon and
//! phonon numbers to second order, and their time averages.
//!
//! Two evaluation modes are offered. [`Approximation::Full`] integrates the
//! complete expressions exactly (as sums of exponentials); it keeps every
//! off-resonant term and truncates mode sums at `num_modes`.
//! [`Approximation::Resonant`] returns the secular closed forms valid at
//! degenerate resonance ω = 2ω_k.

mod fields;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::aux::AuxFunctions;
use crate::model::{DriveForm, Spectrum, SystemConfig, Target};
use crate::numeric::quad::integrate_panels;
use crate::numeric::special::sinc;
use crate::{Error, Result};

use fields::Fields;

/// Default resonance tolerance in units of ω₁.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Approximation {
    Resonant,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeRef {
    Cavity(usize),
    Mechanical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallTrajectoryPoint {
    /// Seconds.
    pub t: f64,
    /// Meters.
    pub x0: f64,
    pub x1_tilde: f64,
    pub x2_tilde: f64,
    pub x3: f64,
    /// Meters.
    pub x_total: f64,
    pub gamma_k: f64,
    /// False when t lies outside [0, t_c/2].
    pub in_window: bool,
}

/// Expectation value split by perturbative order. The second-order
/// sub-terms of a photon number add up to `order2`; they are zero for
/// phonon numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NumberBreakdown {
    pub t: f64,
    pub mode: Option<ModeRef>,
    pub epsilon: f64,
    pub order0: f64,
    pub order1: f64,
    pub order2: f64,
    pub n_beta: f64,
    pub n_vac: f64,
    pub n_sq: f64,
    pub n_t: f64,
    pub n_sqt: f64,
    pub n_md: f64,
    /// Part of the second order carried by the coherent cavity amplitudes.
    pub n_coherent: f64,
    /// Magnitude of the last decade of terms in the truncated mode sum.
    pub tail_estimate: f64,
}

impl NumberBreakdown {
    pub fn total(&self) -> f64 {
        self.order0 + self.epsilon * self.order1 + self.epsilon.powi(2) * self.order2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResonanceKind {
    Degenerate(usize),
    Nondegenerate(usize, usize),
    /// ω = ω_k − ω_k′, reported as (k, k′) with k > k′.
    ModeMixing(usize, usize),
    OffResonant,
}

pub fn classify_resonance(cfg: &SystemConfig) -> ResonanceKind {
    let tol = RESONANCE_TOLERANCE * cfg.spectrum().freq[0];
    classify_resonance_with(cfg.spectrum(), cfg.omega_tilde(), tol)
}

/// Scans ω = 2ω_k, then ω = ω_k + ω_k′, then ω = ω_k′ − ω_k for k < k′.
/// All frequencies dimensionless.
pub fn classify_resonance_with(sp: &Spectrum, omega: f64, tol: f64) -> ResonanceKind {
    let f = &sp.freq;
    if let Some(k) = (0..f.len()).find(|&k| (omega - 2.0 * f[k]).abs() <= tol) {
        return ResonanceKind::Degenerate(k + 1);
    }
    for k in 0..f.len() {
        for kp in k + 1..f.len() {
            if (omega - f[k] - f[kp]).abs() <= tol {
                return ResonanceKind::Nondegenerate(k + 1, kp + 1);
            }
        }
    }
    for k in 0..f.len() {
        for kp in k + 1..f.len() {
            if (omega - (f[kp] - f[k])).abs() <= tol {
                return ResonanceKind::ModeMixing(kp + 1, k + 1);
            }
        }
    }
    ResonanceKind::OffResonant
}

fn check_mode(cfg: &SystemConfig, k: usize) -> Result<()> {
    if k == 0 || k > cfg.cavity.num_modes {
        return Err(Error::invalid("mode", format!("mode {k} outside 1..={}", cfg.cavity.num_modes)));
    }
    Ok(())
}

fn check_order(max_order: usize, limit: usize) -> Result<()> {
    if max_order > limit {
        return Err(Error::invalid("max_order", format!("must be at most {limit}")));
    }
    Ok(())
}

fn check_degenerate(cfg: &SystemConfig, k: usize) -> Result<()> {
    let tol = RESONANCE_TOLERANCE * cfg.spectrum().freq[0];
    if (cfg.omega_tilde() - 2.0 * cfg.spectrum().freq[k - 1]).abs() > tol {
        return Err(Error::invalid(
            "mechanics.omega",
            format!("resonant closed forms need ω = 2ω_{k}"),
        ));
    }
    Ok(())
}

/// Mechanical drive amplitude g for the closed forms.
fn drive_g(cfg: &SystemConfig) -> Result<f64> {
    match cfg.drive(Target::Mechanical) {
        None => Ok(0.0),
        Some(d) => match d.form {
            DriveForm::Zero => Ok(0.0),
            DriveForm::ExdrRamp => Ok(d.g),
            DriveForm::Tabulated(_) => Err(Error::invalid(
                "drives.form",
                "resonant closed forms need an exdr_ramp mechanical drive",
            )),
        },
    }
}

/// Effective coupling w_k² of mode k (ω_k for a massless field).
fn coupling(cfg: &SystemConfig, k: usize) -> f64 {
    cfg.spectrum().coupling(k)
}

/// Wall position x(t) = L(1 + εx̃⁽¹⁾ + ε²x̃⁽²⁾ + ε³x⁽³⁾) up to `max_order`.
pub fn wall_position(
    cfg: &SystemConfig,
    t: f64,
    max_order: usize,
    approx: Approximation,
) -> Result<WallTrajectoryPoint> {
    check_order(max_order, 3)?;
    if max_order >= 2 && cfg.has_cavity_drive() {
        return Err(Error::invalid("drives", "cavity drives are not supported beyond first order"));
    }
    let tt = cfg.tilde_time(t);
    let k = cfg.state.k;
    let ck = coupling(cfg, k);
    let wk = cfg.spectrum().freq[k - 1];
    let eps = cfg.epsilon();
    let x1 = if max_order >= 1 { first_order_wall(cfg, tt)? } else { 0.0 };
    let (mut x2, mut x3) = (0.0, 0.0);
    if max_order >= 2 {
        match approx {
            Approximation::Full => {
                let f = Fields::new(cfg)?;
                x2 = f.x2(tt);
                if max_order >= 3 {
                    x3 = f.q2(tt);
                }
            }
            Approximation::Resonant => {
                check_degenerate(cfg, k)?;
                let mu = cfg.state.mu_k;
                let a = 2.0 * wk * tt;
                x2 = ck / wk * mu * mu * (1.0 - a.cos() + wk * tt * a.sin());
                if max_order >= 3 {
                    let g = drive_g(cfg)?;
                    let b = cfg.state.beta_mag;
                    x3 = -(ck * ck * tt * tt / 4.0)
                        * (2.0 * b * (a - cfg.state.theta).cos() + g * a.sin());
                }
            }
        }
    }
    let l = cfg.cavity.length;
    Ok(WallTrajectoryPoint {
        t,
        x0: l,
        x1_tilde: x1,
        x2_tilde: x2,
        x3,
        x_total: l * (1.0 + eps * x1 + eps * eps * x2 + eps.powi(3) * x3),
        gamma_k: 1.0 - (eps * ck * tt).powi(2) / 4.0,
        in_window: (0.0..=0.5 * cfg.critical_time()).contains(&t),
    })
}

/// x̃⁽¹⁾ = 2|β|cos(ωt − θ) + 2ξ(t), valid for any drive form.
fn first_order_wall(cfg: &SystemConfig, tt: f64) -> Result<f64> {
    let aux = AuxFunctions::new(cfg);
    let w = cfg.omega_tilde();
    let b = cfg.state.beta_mag;
    let xi = aux.xi(cfg.seconds(tt))?;
    Ok(2.0 * b * (w * tt - cfg.state.theta).cos() + 2.0 * xi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaFamily {
    /// θ = nπ.
    RealBeta,
    /// θ = (n + ½)π.
    ImagBeta,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombinedWall {
    /// Meters.
    pub x: f64,
    /// Time at which the linear growth is arrested, for sin θ = −1 and
    /// μ_k ≠ 0; seconds.
    pub damping_time: Option<f64>,
}

/// Resummed resonant wall trajectory for real or imaginary β.
pub fn wall_position_combined(cfg: &SystemConfig, t: f64, family: ThetaFamily) -> Result<CombinedWall> {
    let k = cfg.state.k;
    check_degenerate(cfg, k)?;
    let theta = cfg.state.theta;
    let offset = match family {
        ThetaFamily::RealBeta => 0.0,
        ThetaFamily::ImagBeta => 0.5,
    };
    let n = (theta / PI - offset).round();
    if (theta - (n + offset) * PI).abs() > 1e-9 {
        return Err(Error::invalid("state.theta", format!("θ = {theta} is not in the {family:?} family")));
    }
    let parity = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let g = drive_g(cfg)?;
    let eps = cfg.epsilon();
    let tt = cfg.tilde_time(t);
    let ck = coupling(cfg, k);
    let wk = cfg.spectrum().freq[k - 1];
    let mu2 = cfg.state.mu_k.powi(2) * ck / wk;
    let b = cfg.state.beta_mag;
    let (c2, s2) = ((2.0 * wk * tt).cos(), (2.0 * wk * tt).sin());
    let xl = if cfg.state.mu_k != 0.0 {
        let lin = eps * mu2 * wk * tt;
        match family {
            ThetaFamily::RealBeta => {
                1.0 + eps * (2.0 * parity * b - eps * mu2) * c2 + eps * eps * mu2 + eps * s2 * (lin + g)
            }
            ThetaFamily::ImagBeta => {
                1.0 + 2.0 * eps * eps * mu2 * (wk * tt).sin().powi(2) + eps * s2 * (lin + 2.0 * parity * b + g)
            }
        }
    } else {
        let gamma = 1.0 - (eps * ck * tt).powi(2) / 4.0;
        match family {
            ThetaFamily::RealBeta => 1.0 + eps * (2.0 * parity * b * c2 + g * s2) * gamma,
            ThetaFamily::ImagBeta => 1.0 + eps * (g + 2.0 * parity * b) * gamma * s2,
        }
    };
    let damping_time = (theta.sin() + 1.0 < 1e-12 && cfg.state.mu_k != 0.0 && b > 0.0)
        .then(|| cfg.seconds(cfg.initial_phonons() / (b * mu2 * wk) / eps));
    Ok(CombinedWall { x: cfg.cavity.length * xl, damping_time })
}

/// Photon number of cavity mode `k`.
pub fn photon_number(
    cfg: &SystemConfig,
    k: usize,
    t: f64,
    max_order: usize,
    approx: Approximation,
) -> Result<NumberBreakdown> {
    check_mode(cfg, k)?;
    check_order(max_order, 2)?;
    let tt = cfg.tilde_time(t);
    let mut out = NumberBreakdown {
        t,
        mode: Some(ModeRef::Cavity(k)),
        epsilon: cfg.epsilon(),
        ..Default::default()
    };
    let aux = AuxFunctions::new(cfg);
    let target = [Target::ModeK, Target::ModeKp].into_iter().find(|&j| cfg.target_mode(j) == Some(k));
    let mu = match target {
        Some(Target::ModeK) => cfg.state.mu_k,
        Some(Target::ModeKp) => cfg.state.mu_kp,
        _ => 0.0,
    };
    let alpha = match target {
        Some(j) => aux.alpha(j, tt)?,
        None => Complex64::new(0.0, 0.0),
    };
    out.order0 = (mu + alpha).norm_sqr();
    if max_order == 0 {
        return Ok(out);
    }
    match approx {
        Approximation::Resonant => {
            check_degenerate(cfg, k)?;
            if cfg.has_cavity_drive() || cfg.state.mu_kp != 0.0 {
                return Err(Error::invalid(
                    "drives",
                    "resonant photon number needs zero cavity drives and μ_k′ = 0",
                ));
            }
            let g = drive_g(cfg)?;
            let ck = coupling(cfg, k);
            let (b, st) = (cfg.state.beta_mag, cfg.state.theta.sin());
            out.order1 = -mu * mu * ck * tt * (2.0 * b * st + g);
            if max_order >= 2 {
                let x = (ck * tt).powi(2);
                let s2 = cfg.state.squeeze_r.sinh().powi(2);
                let nt = cfg.thermal_occupation();
                out.n_beta = b * b * x;
                out.n_sq = s2 * x;
                out.n_t = nt * x;
                out.n_sqt = 2.0 * nt * s2 * x;
                out.n_md = g * x / 4.0 * (4.0 * b * st + g);
                out.order2 = out.n_beta + out.n_sq + out.n_t + out.n_sqt + out.n_md;
            }
        }
        Approximation::Full => {
            let f = match Fields::new(cfg) {
                Ok(f) => f,
                Err(e) if max_order == 1 => return first_order_by_quadrature(cfg, k, tt, out).or(Err(e)),
                Err(e) => return Err(e),
            };
            out.order1 = f.nk1(k, tt);
            if max_order >= 2 {
                fill_second_order(cfg, &f, k, tt, &mut out);
            }
        }
    }
    Ok(out)
}

fn fill_second_order(cfg: &SystemConfig, f: &Fields, k: usize, tt: f64, out: &mut NumberBreakdown) {
    let terms = f.without_field().vacuum_photon_terms(k, tt);
    let r = cfg.state.squeeze_r;
    let s2 = r.sinh().powi(2);
    let nt = cfg.thermal_occupation();
    let m0 = -Complex64::from_polar(1.0, cfg.state.squeeze_phi) * (r.sinh() * r.cosh());
    for v in &terms {
        out.n_beta += v.beta;
        out.n_md += v.drive;
        out.n_vac += v.vac;
        out.n_sq += v.incoherent * s2 + (v.anomalous * m0).re;
        out.n_t += v.incoherent * nt;
        out.n_sqt += v.incoherent * 2.0 * nt * s2 + (v.anomalous * m0 * (2.0 * nt)).re;
    }
    let vacuum = out.n_beta + out.n_md + out.n_vac + out.n_sq + out.n_t + out.n_sqt;
    let decade = (terms.len() / 10).max(1);
    out.tail_estimate = terms[terms.len() - decade..]
        .iter()
        .map(|v| {
            (v.beta + v.drive + v.vac + v.incoherent * f.n_s + (v.anomalous * f.m).re).abs()
        })
        .sum();
    let coherent = f.amp.iter().any(|a| !a.is_zero());
    out.n_coherent = if coherent { f.nk2(k, tt) - vacuum } else { 0.0 };
    out.order2 = vacuum + out.n_coherent;
}

/// First-order photon correction for drives without a closed-form α, by
/// adaptive quadrature of 2s_kw_k∫q(s)φ(s)Im[e^{−iω_k s}A_k(t)]ds.
fn first_order_by_quadrature(
    cfg: &SystemConfig,
    k: usize,
    tt: f64,
    mut out: NumberBreakdown,
) -> Result<NumberBreakdown> {
    let aux = AuxFunctions::new(cfg);
    let sp = cfg.spectrum();
    let w = cfg.omega_tilde();
    let beta = cfg.state.beta();
    let amp = |j: Target, s: f64| -> Result<Complex64> {
        let mu = if j == Target::ModeK { cfg.state.mu_k } else { cfg.state.mu_kp };
        Ok(mu + aux.alpha(j, s)?)
    };
    let phi = |s: f64| -> Result<f64> {
        let mut p = 0.0;
        for j in [Target::ModeK, Target::ModeKp] {
            let n = cfg.target_mode(j).expect("cavity target");
            let z = Complex64::from_polar(1.0, -sp.freq[n - 1] * s) * amp(j, s)?;
            p += 2.0 * sp.sign[n - 1] * sp.weight[n - 1] * z.re;
        }
        Ok(p)
    };
    let q = |s: f64| -> Result<f64> {
        Ok(2.0 * (Complex64::from_polar(1.0, -w * s) * (beta + aux.alpha(Target::Mechanical, s)?)).re)
    };
    let target = [Target::ModeK, Target::ModeKp].into_iter().find(|&j| cfg.target_mode(j) == Some(k));
    let a_final = match target {
        Some(j) => amp(j, tt)?,
        None => Complex64::new(0.0, 0.0),
    };
    let wk = sp.freq[k - 1];
    let failed = std::cell::Cell::new(None);
    let integrand = |s: f64| match (q(s), phi(s)) {
        (Ok(qs), Ok(ps)) => qs * ps * (Complex64::from_polar(1.0, -wk * s) * a_final).im,
        (Err(e), _) | (_, Err(e)) => {
            failed.set(Some(e.to_string()));
            0.0
        }
    };
    let panels = (tt.max(1.0) as usize).min(400);
    let v = integrate_panels(integrand, 0.0, tt, panels, 1e-10, 1e-10)?;
    if let Some(msg) = failed.take() {
        return Err(Error::Numerical(msg));
    }
    out.order1 = 2.0 * sp.sign[k - 1] * sp.weight[k - 1] * v;
    Ok(out)
}

/// Phonon number of the mirror.
pub fn phonon_number(
    cfg: &SystemConfig,
    t: f64,
    max_order: usize,
    approx: Approximation,
) -> Result<NumberBreakdown> {
    check_order(max_order, 2)?;
    let tt = cfg.tilde_time(t);
    let mut out = NumberBreakdown {
        t,
        mode: Some(ModeRef::Mechanical),
        epsilon: cfg.epsilon(),
        ..Default::default()
    };
    match approx {
        Approximation::Resonant => {
            let k = cfg.state.k;
            check_degenerate(cfg, k)?;
            let g = drive_g(cfg)?;
            let (b, st) = (cfg.state.beta_mag, cfg.state.theta.sin());
            let ck = coupling(cfg, k);
            let mu = cfg.state.mu_k;
            out.order0 = cfg.initial_phonons() + g * b * st + g * g / 4.0;
            if max_order >= 1 {
                out.order1 = mu * mu * ck * tt / 2.0 * (2.0 * b * st + g);
            }
            if max_order >= 2 {
                out.order2 = -cfg.initial_phonons() * (ck * tt).powi(2) / 2.0;
            }
        }
        Approximation::Full => {
            let aux = AuxFunctions::new(cfg);
            let a = cfg.state.beta() + aux.alpha(Target::Mechanical, tt)?;
            out.order0 = a.norm_sqr() + cfg.fluctuation_phonons();
            if max_order >= 1 {
                let f = Fields::new(cfg)?;
                out.order1 = f.nb1(tt);
                if max_order >= 2 {
                    out.order2 = f.nb2(tt);
                }
            }
        }
    }
    Ok(out)
}

/// ⟨f⟩_τ = (1/τ)∫₀^τ f(t)dt, τ in seconds, to 10⁻¹⁰ relative.
pub fn time_average<F: Fn(f64) -> f64>(f: F, tau: f64, panels: usize) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", "must be positive"));
    }
    Ok(integrate_panels(f, 0.0, tau, panels, 0.0, 1e-10)? / tau)
}

/// Closed-form ⟨x̃⁽²⁾⟩_τ = μ_k²(1 − ½cos 2ω_kτ) for ω_kτ ≫ 1.
pub fn avg_x2(cfg: &SystemConfig, tau: f64) -> f64 {
    let k = cfg.state.k;
    let wk = cfg.spectrum().freq[k - 1];
    let tt = cfg.tilde_time(tau);
    cfg.state.mu_k.powi(2) * coupling(cfg, k) / wk * (1.0 - 0.5 * (2.0 * wk * tt).cos())
}

/// Closed-form ⟨N_k⁽²⁾⟩_τ at degenerate resonance.
pub fn avg_nk2(cfg: &SystemConfig, tau: f64) -> Result<f64> {
    let k = cfg.state.k;
    check_degenerate(cfg, k)?;
    let g = drive_g(cfg)?;
    let x = (coupling(cfg, k) * cfg.tilde_time(tau)).powi(2);
    let s = &cfg.state;
    let s2 = s.squeeze_r.sinh().powi(2);
    let nt = cfg.thermal_occupation();
    Ok(x / 3.0 * (s.beta_mag.powi(2) * s.theta.cos().powi(2) + s2 + nt + 2.0 * nt * s2)
        + x / 12.0 * (g + 2.0 * s.beta_mag * s.theta.sin()).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nondegenerate {
    pub order1: f64,
    /// ⟨N_k⁽²⁾⟩_τ with τ = t.
    pub order2_average: f64,
}

/// Two-mode resonance ω = ω_k + ω_k′.
pub fn photon_number_nondegenerate(cfg: &SystemConfig, k: usize, kp: usize, t: f64) -> Result<Nondegenerate> {
    check_mode(cfg, k)?;
    check_mode(cfg, kp)?;
    let sp = cfg.spectrum();
    let tol = RESONANCE_TOLERANCE * sp.freq[0];
    if (cfg.omega_tilde() - sp.freq[k - 1] - sp.freq[kp - 1]).abs() > tol {
        return Err(Error::invalid("mechanics.omega", format!("needs ω = ω_{k} + ω_{kp}")));
    }
    let g = drive_g(cfg)?;
    let tt = cfg.tilde_time(t);
    let (b, st) = (cfg.state.beta_mag, cfg.state.theta.sin());
    let (mk, mkp) = if (k, kp) == (cfg.state.k, cfg.state.kp) || (kp, k) == (cfg.state.k, cfg.state.kp) {
        let mu = |n: usize| if n == cfg.state.k { cfg.state.mu_k } else { cfg.state.mu_kp };
        (mu(k), mu(kp))
    } else {
        (0.0, 0.0)
    };
    let cc = sp.weight[k - 1] * sp.weight[kp - 1];
    let nbar = cfg.initial_phonons() + g * g / 4.0 + g * b * st;
    Ok(Nondegenerate {
        order1: -sp.sign[k - 1] * sp.sign[kp - 1] * mk * mkp * cc * tt * (2.0 * b * st + g),
        order2_average: nbar * cc * cc * tt * tt / 3.0,
    })
}

/// Photons per unit |β|² created in mode k by a mirror oscillating with
/// real amplitude (θ = 0), all cavity modes in vacuum:
/// w_k²Σₙwₙ²|E(νₙ−ω) + E(νₙ+ω)|² with E(x) = ∫₀ᵗe^{ixs}ds.
pub fn n_beta_per_phonon(sp: &Spectrum, k: usize, omega: f64, t: f64, theta: f64) -> f64 {
    let e = |x: f64| Complex64::from_polar(t * sinc(0.5 * x * t), 0.5 * x * t);
    let b = Complex64::from_polar(1.0, theta);
    let wk2 = sp.weight[k - 1].powi(2);
    (0..sp.len())
        .map(|n| {
            let nu = sp.freq[k - 1] + sp.freq[n];
            wk2 * sp.weight[n].powi(2) * (e(nu - omega) * b + e(nu + omega) * b.conj()).norm_sqr()
        })
        .sum()
}

/// ΔN_β⁽²⁾ = N_β/(|β|²ω_k²t²/2), dimensionless ω and t.
pub fn delta_n_beta(sp: &Spectrum, k: usize, omega: f64, t: f64) -> f64 {
    n_beta_per_phonon(sp, k, omega, t, 0.0) / (0.5 * (sp.freq[k - 1] * t).powi(2))
}

#[cfg(test)]
mod tests;
