//! Drive-frame auxiliary functions Λ_x, Λ_p, ξ, ψ and ϑ.
//!
//! A drive on target j with carrier frequency ν_j (ω for the mirror, ω_j for a
//! cavity mode) displaces the annihilation operator by
//! α_j(t) = Λ_pj(t) − iΛ_xj(t) = −i∫₀ᵗ e^{iν_j s}(λ_xj − iλ_pj)(s) ds.

use num_complex::Complex64;

use crate::model::{DriveForm, SystemConfig, Target};
use crate::numeric::expsum::ExpSum1;
use crate::numeric::quad::integrate;
use crate::Result;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Evaluator bound to one configuration. All arguments and results here are
/// dimensionless (times in L/(πc)); [`AuxFunctions::big_lambda`] and friends
/// take seconds.
#[derive(Clone, Copy)]
pub struct AuxFunctions<'a> {
    cfg: &'a SystemConfig,
}

impl<'a> AuxFunctions<'a> {
    pub fn new(cfg: &'a SystemConfig) -> Self {
        Self { cfg }
    }

    /// Drive amplitudes (λ̃_x, λ̃_p) at dimensionless time t.
    pub fn amplitudes(&self, target: Target, t: f64) -> (f64, f64) {
        let Some(d) = self.cfg.drive(target) else { return (0.0, 0.0) };
        let unit = self.cfg.unit();
        match &d.form {
            DriveForm::Zero => (0.0, 0.0),
            DriveForm::ExdrRamp => {
                let nu = self.cfg.target_frequency(target);
                let r = d.ramp / unit;
                let a = -0.5 * d.g * r * (-r * t).exp();
                (a * (nu * t).cos(), a * (nu * t).sin())
            }
            DriveForm::Tabulated(tab) => {
                let (x, p) = tab.sample(t / unit);
                (x / unit, p / unit)
            }
        }
    }

    /// Closed-form α_j as a sum of exponentials, when one exists.
    pub fn alpha_expsum(&self, target: Target) -> Option<ExpSum1> {
        let Some(d) = self.cfg.drive(target) else { return Some(ExpSum1::new()) };
        match &d.form {
            DriveForm::Zero => Some(ExpSum1::new()),
            DriveForm::ExdrRamp => {
                let r = d.ramp / self.cfg.unit();
                let mut s = ExpSum1::new();
                s.push(I * (0.5 * d.g), C::new(0.0, 0.0));
                s.push(-I * (0.5 * d.g), C::new(-r, 0.0));
                Some(s)
            }
            DriveForm::Tabulated(_) => None,
        }
    }

    /// α_j at dimensionless time t.
    pub fn alpha(&self, target: Target, t: f64) -> Result<C> {
        if let Some(s) = self.alpha_expsum(target) {
            return Ok(s.eval(t));
        }
        let Some(DriveForm::Tabulated(tab)) = self.cfg.drive(target).map(|d| &d.form) else {
            return Ok(C::new(0.0, 0.0));
        };
        let unit = self.cfg.unit();
        let nu = self.cfg.target_frequency(target);
        // integrate segment by segment so the kinks of the interpolant are nodes
        let mut knots: Vec<f64> = vec![0.0];
        knots.extend(tab.times.iter().map(|x| x * unit).filter(|&x| x > 0.0 && x < t));
        knots.push(t);
        let mut re = 0.0;
        let mut im = 0.0;
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            re += integrate(
                |s| {
                    let (x, p) = self.amplitudes(target, s);
                    x * (nu * s).sin() - p * (nu * s).cos()
                },
                a,
                b,
                1e-13,
                0.0,
            )?;
            im -= integrate(
                |s| {
                    let (x, p) = self.amplitudes(target, s);
                    x * (nu * s).cos() + p * (nu * s).sin()
                },
                a,
                b,
                1e-13,
                0.0,
            )?;
        }
        Ok(C::new(re, im))
    }

    /// (Λ_x, Λ_p) at dimensionless time t.
    pub fn lambdas(&self, target: Target, t: f64) -> Result<(f64, f64)> {
        let a = self.alpha(target, t)?;
        Ok((-a.im, a.re))
    }

    /// (Λ_xj(t), Λ_pj(t)) at t seconds.
    pub fn big_lambda(&self, t: f64, target: Target) -> Result<(f64, f64)> {
        self.lambdas(target, self.cfg.tilde_time(t))
    }

    /// Λ⁻_j = Λ_xj − Λ_pj at t seconds.
    pub fn lambda_minus(&self, t: f64, target: Target) -> Result<f64> {
        let (x, p) = self.big_lambda(t, target)?;
        Ok(x - p)
    }

    /// ξ(t) = cos(ωt)Λ_pb − sin(ωt)Λ_xb = Re[e^{−iωt}α_b], t in seconds.
    pub fn xi(&self, t: f64) -> Result<f64> {
        let tt = self.cfg.tilde_time(t);
        let w = self.cfg.omega_tilde();
        let (x, p) = self.lambdas(Target::Mechanical, tt)?;
        Ok((w * tt).cos() * p - (w * tt).sin() * x)
    }

    /// ψ_j(t) = Re[e^{−iω_j t}α_j] = cos(ω_j t)Λ_pj − sin(ω_j t)Λ_xj for
    /// j ∈ {k, k′}, t in seconds.
    pub fn psi(&self, t: f64, target: Target) -> Result<f64> {
        let tt = self.cfg.tilde_time(t);
        let w = self.cfg.target_frequency(target);
        let (x, p) = self.lambdas(target, tt)?;
        Ok((w * tt).cos() * p - (w * tt).sin() * x)
    }

    /// ϑ(t): the c-number part ½φ_d(t)² of the displaced coupling, with
    /// φ_d = 2(−1)^k w_k ψ_k + 2(−1)^{k′} w_{k′} ψ_{k′}. Dimensionless.
    pub fn vartheta(&self, t: f64) -> Result<f64> {
        let sp = self.cfg.spectrum();
        let mut phi = 0.0;
        for target in [Target::ModeK, Target::ModeKp] {
            let n = self.cfg.target_mode(target).expect("cavity target");
            phi += 2.0 * sp.sign[n - 1] * sp.weight[n - 1] * self.psi(t, target)?;
        }
        Ok(0.5 * phi * phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dimensionless_system, DriveProfile, DriveTable, InitialState};

    fn exdr_cfg() -> SystemConfig {
        dimensionless_system(
            4,
            1.0,
            1e-3,
            InitialState::default(),
            vec![
                DriveProfile::exdr(Target::Mechanical, 1.0, 50.0),
                DriveProfile::exdr(Target::ModeK, 0.3, 20.0),
            ],
        )
        .unwrap()
    }

    fn tabulated_clone(cfg: &SystemConfig, target: Target) -> SystemConfig {
        let aux = AuxFunctions::new(cfg);
        // quadratic spacing resolves the fast initial ramp
        let n = 20001;
        let t_end = 12.0;
        let times: Vec<f64> =
            (0..n).map(|i| t_end * (i as f64 / (n - 1) as f64).powi(2)).collect();
        let (lx, lp): (Vec<f64>, Vec<f64>) =
            times.iter().map(|&t| aux.amplitudes(target, t)).unzip();
        let d = DriveProfile {
            target,
            g: 0.0,
            ramp: 0.0,
            form: DriveForm::Tabulated(DriveTable { times, lambda_x: lx, lambda_p: lp }),
        };
        dimensionless_system(4, 1.0, 1e-3, InitialState::default(), vec![d]).unwrap()
    }

    #[test]
    fn vanishes_at_origin_and_without_drive() {
        let cfg = exdr_cfg();
        let aux = AuxFunctions::new(&cfg);
        assert_eq!(aux.big_lambda(0.0, Target::Mechanical).unwrap(), (0.0, 0.0));
        assert_eq!(aux.xi(0.0).unwrap(), 0.0);
        assert_eq!(aux.vartheta(0.0).unwrap(), 0.0);
        let quiet = cfg.with_drives(vec![]).unwrap();
        let aux = AuxFunctions::new(&quiet);
        let t = quiet.seconds(3.0);
        assert_eq!(aux.big_lambda(t, Target::ModeK).unwrap(), (0.0, 0.0));
        assert_eq!(aux.xi(t).unwrap(), 0.0);
        assert_eq!(aux.psi(t, Target::ModeKp).unwrap(), 0.0);
        assert_eq!(aux.vartheta(t).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let cfg = exdr_cfg();
        let aux = AuxFunctions::new(&cfg);
        let tab = tabulated_clone(&cfg, Target::Mechanical);
        let tab_aux = AuxFunctions::new(&tab);
        for i in 1..=20 {
            let t = 10.0 * i as f64 / 20.0;
            let a = aux.lambdas(Target::Mechanical, t).unwrap();
            let b = tab_aux.lambdas(Target::Mechanical, t).unwrap();
            // linear interpolation of the samples limits agreement
            assert!((a.0 - b.0).abs() < 2e-5 && (a.1 - b.1).abs() < 2e-5, "{t}: {a:?} {b:?}");
        }
    }

    #[test]
    fn closed_form_matches_direct_quadrature_tightly() {
        let cfg = exdr_cfg();
        let aux = AuxFunctions::new(&cfg);
        let w = cfg.omega_tilde();
        for i in 1..=100 {
            let t = 10.0 / w * i as f64 / 100.0;
            let (x, p) = aux.lambdas(Target::Mechanical, t).unwrap();
            let qx = integrate(
                |s| {
                    let (lx, lp) = aux.amplitudes(Target::Mechanical, s);
                    lx * (w * s).cos() + lp * (w * s).sin()
                },
                0.0,
                t,
                1e-14,
                0.0,
            )
            .unwrap();
            let qp = integrate(
                |s| {
                    let (lx, lp) = aux.amplitudes(Target::Mechanical, s);
                    lx * (w * s).sin() - lp * (w * s).cos()
                },
                0.0,
                t,
                1e-14,
                0.0,
            )
            .unwrap();
            assert!((x - qx).abs() < 1e-10 && (p - qp).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_identities() {
        let cfg = exdr_cfg();
        let aux = AuxFunctions::new(&cfg);
        for target in [Target::Mechanical, Target::ModeK] {
            let nu = cfg.target_frequency(target);
            let h = 1e-6 / nu;
            // later times make the derivative so small that the difference
            // quotient is dominated by rounding
            for &t in &[0.01, 0.03, 0.05, 0.08] {
                let (x1, p1) = aux.lambdas(target, t + h).unwrap();
                let (x0, p0) = aux.lambdas(target, t - h).unwrap();
                let (dx, dp) = ((x1 - x0) / (2.0 * h), (p1 - p0) / (2.0 * h));
                let (lx, lp) = aux.amplitudes(target, t);
                let ex = lx * (nu * t).cos() + lp * (nu * t).sin();
                let ep = lx * (nu * t).sin() - lp * (nu * t).cos();
                let scale = ex.abs().max(ep.abs());
                assert!((dx - ex).abs() <= 1e-6 * scale, "{target:?} {t}: {dx} {ex}");
                assert!((dp - ep).abs() <= 1e-6 * scale.max(1e-3), "{target:?} {t}: {dp} {ep}");
            }
        }
    }

    #[test]
    fn xi_approaches_sinusoid() {
        let cfg = exdr_cfg();
        let aux = AuxFunctions::new(&cfg);
        let w = cfg.omega_tilde();
        for &tt in &[2.0, 3.3, 5.0] {
            let t = cfg.seconds(tt);
            let xi = aux.xi(t).unwrap();
            let expected = 0.5 * (w * tt).sin() * (1.0 - (-50.0 * tt).exp());
            assert!((xi - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn vartheta_with_only_mode_k_drive() {
        let cfg = exdr_cfg();
        let aux = AuxFunctions::new(&cfg);
        let tt = 1.3;
        let t = cfg.seconds(tt);
        let (x, p) = aux.lambdas(Target::ModeK, tt).unwrap();
        let w1 = cfg.spectrum().freq[0];
        let psi = (w1 * tt).cos() * p - (w1 * tt).sin() * x;
        let expected = 2.0 * w1 * psi * psi;
        assert!((aux.vartheta(t).unwrap() - expected).abs() < 1e-14);
    }
}
