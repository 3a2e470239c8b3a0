//! Radiation force on the movable wall: exponentially regularized vacuum
//! force, the renormalized static Casimir force and the time-averaged
//! resonant dynamical contribution.

use std::f64::consts::PI;

use crate::model::{DriveForm, SystemConfig, Target};
use crate::numeric::extrapolate_to_zero;
use crate::numeric::special::inv_sinh2_finite;
use crate::units::{C, HBAR};
use crate::{Error, Result};

/// Regularized sums are valid for α = γπc/L below this value.
pub const MAX_CUTOFF_ALPHA: f64 = 0.1;

/// Cutoffs (as α = γπc/L) used for the γ → 0 extrapolation.
const RICHARDSON_ALPHAS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

fn cutoff_alpha(length: f64, gamma: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::invalid("length", "must be positive"));
    }
    let alpha = gamma * PI * C / length;
    if !(gamma > 0.0) || alpha >= MAX_CUTOFF_ALPHA {
        return Err(Error::invalid("gamma", format!("need 0 < γπc/L < {MAX_CUTOFF_ALPHA}, got {alpha:e}")));
    }
    Ok(alpha)
}

/// (ħπc/2L²)·Σ n e^{−αn} = (ħπc/2L²)·e^α/(e^α − 1)², α = γπc/L. Newtons.
pub fn regularized_vacuum_force(length: f64, gamma: f64) -> Result<f64> {
    let alpha = cutoff_alpha(length, gamma)?;
    Ok(HBAR * PI * C / (2.0 * length * length) / (4.0 * (0.5 * alpha).sinh().powi(2)))
}

/// Regularized force minus its divergent part ħ/(2πcγ²), evaluated without
/// cancellation. Newtons.
pub fn subtracted_vacuum_force(length: f64, gamma: f64) -> Result<f64> {
    let alpha = cutoff_alpha(length, gamma)?;
    Ok(HBAR * PI * C / (2.0 * length * length) * inv_sinh2_finite(alpha))
}

/// γ → 0 limit of [`subtracted_vacuum_force`] by polynomial extrapolation
/// in γ². Newtons.
pub fn static_casimir_force(length: f64) -> Result<f64> {
    let samples = RICHARDSON_ALPHAS
        .iter()
        .map(|&a| {
            let gamma = a * length / (PI * C);
            subtracted_vacuum_force(length, gamma).map(|f| (a * a, f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(extrapolate_to_zero(&samples))
}

/// How the mirror frequency follows the cavity length in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FrequencyMode {
    /// ω = 2ω_k(L) at every length.
    #[default]
    Retuned,
    /// ω kept at its configured value.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceResult {
    /// Meters.
    pub length: f64,
    /// Seconds.
    pub tau: f64,
    pub f_static: f64,
    pub f_dynamic: f64,
    pub f_total: f64,
    pub n_bar: f64,
    /// The oscillating contribution of the outer reference cavity is dropped.
    pub outer_oscillation_dropped: bool,
}

/// N̄_b(θ) = N_b(0) + g²/4 + g|β|sinθ.
pub fn effective_phonons(cfg: &SystemConfig) -> Result<f64> {
    let g = match cfg.drive(Target::Mechanical).map(|d| (&d.form, d.g)) {
        None | Some((DriveForm::Zero, _)) => 0.0,
        Some((DriveForm::ExdrRamp, g)) => g,
        Some((DriveForm::Tabulated(_), _)) => {
            return Err(Error::invalid("drives.form", "the resonant force needs an exdr_ramp drive"))
        }
    };
    Ok(cfg.initial_phonons() + g * g / 4.0 + g * cfg.state.beta_mag * cfg.state.theta.sin())
}

fn check_resonant(cfg: &SystemConfig) -> Result<()> {
    let k = cfg.state.k;
    let w1 = cfg.spectrum().freq[0];
    if (cfg.omega_tilde() - 2.0 * cfg.spectrum().freq[k - 1]).abs() > crate::engine::RESONANCE_TOLERANCE * w1 {
        return Err(Error::invalid("mechanics.omega", format!("the force closed form needs ω = 2ω_{k}")));
    }
    Ok(())
}

/// (ε², ω_k) at length L.
fn coupling_at(cfg: &SystemConfig, length: f64, mode: FrequencyMode) -> (f64, f64) {
    let wk = cfg.state.k as f64 * PI * C / length;
    let omega = match mode {
        FrequencyMode::Retuned => 2.0 * wk,
        FrequencyMode::Fixed => cfg.mech.omega,
    };
    let dl2 = HBAR / (2.0 * cfg.mech.mass * omega);
    (dl2 / (length * length), wk)
}

/// F(L, τ) = −ħπc/(24L²) + N̄_b ε²ħω_k³τ²/(6L), with ε and ω_k evaluated at L.
pub fn casimir_force(cfg: &SystemConfig, length: f64, tau: f64, mode: FrequencyMode) -> Result<ForceResult> {
    check_resonant(cfg)?;
    if !(tau >= 0.0) {
        return Err(Error::invalid("tau", "must be non-negative"));
    }
    let n_bar = effective_phonons(cfg)?;
    let f_static = static_casimir_force(length)?;
    let (eps2, wk) = coupling_at(cfg, length, mode);
    let f_dynamic = n_bar * eps2 * HBAR * wk.powi(3) * tau * tau / (6.0 * length);
    Ok(ForceResult {
        length,
        tau,
        f_static,
        f_dynamic,
        f_total: f_static + f_dynamic,
        n_bar,
        outer_oscillation_dropped: true,
    })
}

/// Closed-form total force without the cutoff machinery.
fn total_force(cfg: &SystemConfig, n_bar: f64, length: f64, tau: f64, mode: FrequencyMode) -> f64 {
    let (eps2, wk) = coupling_at(cfg, length, mode);
    -HBAR * PI * C / (24.0 * length * length) + n_bar * eps2 * HBAR * wk.powi(3) * tau * tau / (6.0 * length)
}

/// Length at which the time-averaged force changes sign. For the retuned
/// mode L_c³ = πk²N̄_bħcτ²/M; for fixed ω, L_c⁴ = 4k³π²N̄_bδL₀²c²τ².
pub fn critical_length(cfg: &SystemConfig, tau: f64, mode: FrequencyMode) -> Result<f64> {
    check_resonant(cfg)?;
    let n_bar = effective_phonons(cfg)?;
    if !(n_bar > 0.0) || !(tau > 0.0) {
        return Err(Error::invalid("state", "no sign inversion without phonons or for τ = 0"));
    }
    let k = cfg.state.k as f64;
    let guess = match mode {
        FrequencyMode::Retuned => (PI * k * k * n_bar * HBAR * C * tau * tau / cfg.mech.mass).cbrt(),
        FrequencyMode::Fixed => {
            let dl2 = HBAR / (2.0 * cfg.mech.mass * cfg.mech.omega);
            (4.0 * k.powi(3) * PI * PI * n_bar * dl2 * C * C * tau * tau).powf(0.25)
        }
    };
    // polish on the scale-free residual F·L²
    let h = |l: f64| total_force(cfg, n_bar, l, tau, mode) * l * l;
    let mut l = guess;
    for _ in 0..8 {
        let d = 1e-6 * l;
        let slope = (h(l + d) - h(l - d)) / (2.0 * d);
        let step = h(l) / slope;
        l -= step;
        if step.abs() < 1e-15 * l {
            break;
        }
    }
    let scale = HBAR * PI * C / 24.0;
    if (h(l) / scale).abs() > 1e-9 {
        return Err(Error::Numerical(format!("critical length did not converge at L = {l:e} m")));
    }
    Ok(l)
}

/// Position and value of the force minimum beyond L_c.
pub fn minimum_force(cfg: &SystemConfig, tau: f64, mode: FrequencyMode) -> Result<(f64, f64)> {
    let lc = critical_length(cfg, tau, mode)?;
    let a = HBAR * PI * C / 24.0;
    Ok(match mode {
        FrequencyMode::Retuned => {
            let l = 2.5f64.cbrt() * lc;
            (l, -3.0 / 5.0 * a / (l * l))
        }
        FrequencyMode::Fixed => {
            let l = 3f64.powf(0.25) * lc;
            (l, -2.0 / 3.0 * a / (l * l))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavitySpec, InitialState, MechanicalSpec};

    fn cfg(beta2: f64) -> SystemConfig {
        let cavity = CavitySpec::massless(10e-6, 8);
        let omega = 2.0 * cavity.mode_frequency(1);
        let state = InitialState { beta_mag: beta2.sqrt(), ..Default::default() };
        crate::make_system(cavity, MechanicalSpec { omega, mass: 1e-16 }, state, vec![]).unwrap()
    }

    fn casimir(l: f64) -> f64 {
        -HBAR * PI * C / (24.0 * l * l)
    }

    #[test]
    fn subtraction_matches_direct_evaluation() {
        let l = 1e-5;
        let gamma = 0.05 * l / (PI * C);
        let direct = regularized_vacuum_force(l, gamma).unwrap() - HBAR / (2.0 * PI * C * gamma * gamma);
        let sub = subtracted_vacuum_force(l, gamma).unwrap();
        assert!((direct - sub).abs() < 1e-9 * regularized_vacuum_force(l, gamma).unwrap());
    }

    #[test]
    fn small_cutoff_approaches_casimir() {
        let l = 1e-5;
        let gamma = 1e-3 * l / (PI * C);
        let f = subtracted_vacuum_force(l, gamma).unwrap();
        assert!((f / casimir(l) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn extrapolated_static_force() {
        for l in [1e-7, 1e-5, 3e-3] {
            assert!((static_casimir_force(l).unwrap() / casimir(l) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn length_scaling() {
        let gamma = 1e-3 * 1e-5 / (PI * C);
        let a = subtracted_vacuum_force(1e-5, gamma).unwrap();
        let b = subtracted_vacuum_force(2e-5, gamma).unwrap();
        assert!((b / a - 0.25).abs() < 1e-6);
    }

    #[test]
    fn rejects_large_cutoff() {
        assert!(regularized_vacuum_force(1e-5, 1.0).is_err());
        assert!(regularized_vacuum_force(1e-5, 0.0).is_err());
    }

    #[test]
    fn zero_tau_is_static() {
        let r = casimir_force(&cfg(1.0), 1e-5, 0.0, FrequencyMode::Retuned).unwrap();
        assert_eq!(r.f_dynamic, 0.0);
        assert!((r.f_total / casimir(1e-5) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn critical_length_is_a_root_and_scales() {
        let c = cfg(50.0);
        for mode in [FrequencyMode::Retuned, FrequencyMode::Fixed] {
            let lc = critical_length(&c, 1e-6, mode).unwrap();
            let f = casimir_force(&c, lc, 1e-6, mode).unwrap();
            assert!(f.f_total.abs() <= 1e-9 * f.f_static.abs(), "{mode:?}");
            for s in [0.5, 0.9, 1.1, 2.0] {
                let f = casimir_force(&c, s * lc, 1e-6, mode).unwrap().f_total;
                // the dynamical push dominates at short lengths
                assert_eq!(f > 0.0, s < 1.0);
            }
        }
        let l1 = critical_length(&cfg(10.0), 1e-6, FrequencyMode::Retuned).unwrap();
        let l8 = critical_length(&cfg(80.0), 1e-6, FrequencyMode::Retuned).unwrap();
        assert!((l8 / l1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn minimum_is_stationary() {
        let c = cfg(50.0);
        for mode in [FrequencyMode::Retuned, FrequencyMode::Fixed] {
            let (l, fmin) = minimum_force(&c, 1e-6, mode).unwrap();
            let f = |x: f64| casimir_force(&c, x, 1e-6, mode).unwrap().f_total;
            assert!((f(l) / fmin - 1.0).abs() < 1e-9);
            let h = 1e-4 * l;
            let slope = (f(l + h) - f(l - h)) / (2.0 * h);
            assert!(slope.abs() * l / fmin.abs() < 1e-6);
        }
    }

    #[test]
    fn dynamic_term_scales_with_length() {
        let c = cfg(1.0);
        let a = casimir_force(&c, 1e-5, 1e-6, FrequencyMode::Retuned).unwrap().f_dynamic;
        let b = casimir_force(&c, 2e-5, 1e-6, FrequencyMode::Retuned).unwrap().f_dynamic;
        // ε² ∝ 1/(ωL²) ∝ 1/L, ω_k³ ∝ 1/L³, and the explicit 1/L
        assert!((b / a - 1.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn no_phonons_no_inversion() {
        assert!(critical_length(&cfg(0.0), 1e-6, FrequencyMode::Retuned).is_err());
    }
}
