//! System specification: cavity, mirror, initial state and external drives.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::units::{thermal_occupation, C, HBAR};
use crate::{Error, Result};

/// Largest ε accepted by [`make_system`].
pub const MAX_EPSILON: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    /// Cavity length L in meters.
    pub length: f64,
    /// Number of field modes kept in mode sums.
    pub num_modes: usize,
    /// Field mass in kilograms; zero for the massless field.
    #[serde(default)]
    pub field_mass: f64,
}

impl CavitySpec {
    pub fn massless(length: f64, num_modes: usize) -> Self {
        Self { length, num_modes, field_mass: 0.0 }
    }

    /// πc/L, the frequency unit used internally (rad/s).
    pub fn frequency_unit(&self) -> f64 {
        PI * C / self.length
    }

    /// Dimensionless field mass M_f c L/(πħ), so that ω̃ₙ = sqrt(n² + m̃²).
    pub fn mass_tilde(&self) -> f64 {
        self.field_mass * C * self.length / (PI * HBAR)
    }

    /// Angular frequency of mode n (rad/s).
    pub fn mode_frequency(&self, n: usize) -> f64 {
        let p = n as f64;
        let m = self.mass_tilde();
        (p * p + m * m).sqrt() * self.frequency_unit()
    }

    fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid("cavity.length", "must be positive"));
        }
        if self.num_modes == 0 {
            return Err(Error::invalid("cavity.num_modes", "must be at least 1"));
        }
        if !(self.field_mass >= 0.0) {
            return Err(Error::invalid("cavity.field_mass", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanicalSpec {
    /// Mirror angular frequency ω (rad/s).
    pub omega: f64,
    /// Mirror mass M (kg).
    pub mass: f64,
}

impl MechanicalSpec {
    /// Mass chosen so that δL₀/length equals `epsilon`.
    pub fn with_epsilon(omega: f64, epsilon: f64, length: f64) -> Self {
        let dl = epsilon * length;
        Self { omega, mass: HBAR / (2.0 * omega * dl * dl) }
    }

    /// Zero-point amplitude sqrt(ħ/2Mω) in meters.
    pub fn delta_l0(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega)).sqrt()
    }

    pub fn epsilon(&self, length: f64) -> f64 {
        self.delta_l0() / length
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("mechanics.omega", "must be positive"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mechanics.mass", "must be positive"));
        }
        Ok(())
    }
}

/// Thermal part of the mechanical state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thermal {
    /// Temperature in kelvin.
    Temperature(f64),
    /// Mean thermal occupation N_T.
    Occupation(f64),
}

impl Default for Thermal {
    fn default() -> Self {
        Thermal::Occupation(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialState {
    pub k: usize,
    pub kp: usize,
    pub mu_k: f64,
    pub mu_kp: f64,
    pub beta_mag: f64,
    pub theta: f64,
    pub squeeze_r: f64,
    pub squeeze_phi: f64,
    pub thermal: Thermal,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            k: 1,
            kp: 2,
            mu_k: 0.0,
            mu_kp: 0.0,
            beta_mag: 0.0,
            theta: 0.0,
            squeeze_r: 0.0,
            squeeze_phi: 0.0,
            thermal: Thermal::default(),
        }
    }
}

impl InitialState {
    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar(self.beta_mag, self.theta)
    }

    pub fn thermal_occupation(&self, omega: f64) -> f64 {
        match self.thermal {
            Thermal::Temperature(t) => thermal_occupation(omega, t),
            Thermal::Occupation(n) => n,
        }
    }

    fn validate(&self, num_modes: usize) -> Result<()> {
        if self.k == 0 || self.k > num_modes {
            return Err(Error::invalid("state.k", format!("must lie in 1..={num_modes}")));
        }
        if self.kp == 0 || self.kp > num_modes {
            return Err(Error::invalid("state.kp", format!("must lie in 1..={num_modes}")));
        }
        if self.k == self.kp {
            return Err(Error::invalid("state.kp", "must differ from state.k"));
        }
        for (name, v) in [
            ("state.mu_k", self.mu_k),
            ("state.mu_kp", self.mu_kp),
            ("state.theta", self.theta),
            ("state.squeeze_phi", self.squeeze_phi),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if !(self.beta_mag >= 0.0 && self.beta_mag.is_finite()) {
            return Err(Error::invalid("state.beta_mag", "must be non-negative"));
        }
        if !(self.squeeze_r >= 0.0 && self.squeeze_r.is_finite()) {
            return Err(Error::invalid("state.squeeze_r", "must be non-negative"));
        }
        let t = match self.thermal {
            Thermal::Temperature(t) | Thermal::Occupation(t) => t,
        };
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid("state.thermal", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    ModeK,
    ModeKp,
    Mechanical,
}

/// Sampled drive amplitudes λ_x(t), λ_p(t) in rad/s, linearly interpolated
/// and zero outside the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveTable {
    pub times: Vec<f64>,
    pub lambda_x: Vec<f64>,
    pub lambda_p: Vec<f64>,
}

impl DriveTable {
    fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n < 2 || self.lambda_x.len() != n || self.lambda_p.len() != n {
            return Err(Error::invalid(
                "drives.table",
                "needs at least two samples and equal column lengths",
            ));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("drives.table.times", "must be strictly increasing"));
        }
        Ok(())
    }

    /// (λ_x, λ_p) at time t.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        let ts = &self.times;
        if t < ts[0] || t > ts[ts.len() - 1] {
            return (0.0, 0.0);
        }
        let i = match ts.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return (self.lambda_x[i], self.lambda_p[i]),
            Err(i) => i - 1,
        };
        let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        (
            self.lambda_x[i] + w * (self.lambda_x[i + 1] - self.lambda_x[i]),
            self.lambda_p[i] + w * (self.lambda_p[i + 1] - self.lambda_p[i]),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum DriveForm {
    /// λ_x = −(gΩ/2)e^{−Ωt}cos(νt), λ_p = −(gΩ/2)e^{−Ωt}sin(νt), with ν the
    /// target frequency.
    ExdrRamp,
    Zero,
    Tabulated(DriveTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveProfile {
    pub target: Target,
    /// Dimensionless amplitude g (signed).
    #[serde(default)]
    pub g: f64,
    /// Ramp rate Ω (rad/s).
    #[serde(default)]
    pub ramp: f64,
    #[serde(flatten)]
    pub form: DriveForm,
}

impl DriveProfile {
    pub fn exdr(target: Target, g: f64, ramp: f64) -> Self {
        Self { target, g, ramp, form: DriveForm::ExdrRamp }
    }

    /// False when the profile is identically zero.
    pub fn is_active(&self) -> bool {
        match &self.form {
            DriveForm::Zero => false,
            DriveForm::ExdrRamp => self.g != 0.0,
            DriveForm::Tabulated(_) => true,
        }
    }
}

/// Dimensionless mode data: ω̃ₙ, coupling weight wₙ and sign (−1)ⁿ for
/// n = 1..=N (stored at index n − 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub freq: Vec<f64>,
    pub weight: Vec<f64>,
    pub sign: Vec<f64>,
}

impl Spectrum {
    /// Massless spectrum ω̃ₙ = n, wₙ = sqrt(n).
    pub fn massless(num_modes: usize) -> Self {
        Self::with_mass(num_modes, 0.0)
    }

    /// ω̃ₙ = sqrt(n² + m̃²), wₙ = n/sqrt(ω̃ₙ).
    pub fn with_mass(num_modes: usize, mass_tilde: f64) -> Self {
        let mut freq = Vec::with_capacity(num_modes);
        let mut weight = Vec::with_capacity(num_modes);
        let mut sign = Vec::with_capacity(num_modes);
        for n in 1..=num_modes {
            let p = n as f64;
            let w = (p * p + mass_tilde * mass_tilde).sqrt();
            freq.push(w);
            weight.push(p / w.sqrt());
            sign.push(if n % 2 == 0 { 1.0 } else { -1.0 });
        }
        Self { freq, weight, sign }
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Coupling constant of a†ₙaₙ X_b in units of ħ (w²ₙ; ω̃ₙ when massless).
    pub fn coupling(&self, n: usize) -> f64 {
        self.weight[n - 1].powi(2)
    }
}

/// Immutable, validated configuration with cached derived quantities.
#[derive(Clone, Debug)]
pub struct SystemConfig {
    pub cavity: CavitySpec,
    pub mech: MechanicalSpec,
    pub state: InitialState,
    pub drives: Vec<DriveProfile>,
    unit: f64,
    spectrum: Spectrum,
    omega_tilde: f64,
    epsilon: f64,
    n_t: f64,
    warnings: Vec<String>,
}

/// Validates the specifications and caches derived quantities.
pub fn make_system(
    cavity: CavitySpec,
    mech: MechanicalSpec,
    state: InitialState,
    drives: Vec<DriveProfile>,
) -> Result<SystemConfig> {
    cavity.validate()?;
    mech.validate()?;
    state.validate(cavity.num_modes)?;
    let epsilon = mech.epsilon(cavity.length);
    if epsilon >= MAX_EPSILON {
        return Err(Error::invalid(
            "mechanics.mass",
            format!("ε = δL₀/L = {epsilon:e} is not below {MAX_EPSILON:e}"),
        ));
    }
    let unit = cavity.frequency_unit();
    let spectrum = Spectrum::with_mass(cavity.num_modes, cavity.mass_tilde());
    let mut warnings = Vec::new();
    let mut seen = Vec::new();
    for d in &drives {
        if seen.contains(&d.target) {
            return Err(Error::invalid("drives", format!("duplicate drive target {:?}", d.target)));
        }
        seen.push(d.target);
        if !d.g.is_finite() {
            return Err(Error::invalid("drives.g", "must be finite"));
        }
        match &d.form {
            DriveForm::ExdrRamp => {
                if !(d.ramp > 0.0 && d.ramp.is_finite()) {
                    return Err(Error::invalid("drives.ramp", "must be positive for exdr_ramp"));
                }
                let r = d.ramp / unit;
                if spectrum.freq.iter().any(|w| (w - r).abs() < 1e-6) {
                    warnings.push(format!(
                        "drive on {:?}: ramp rate coincides with a cavity mode frequency",
                        d.target
                    ));
                }
                if d.ramp < 10.0 * mech.omega {
                    warnings.push(format!(
                        "drive on {:?}: ramp rate Ω = {:e} rad/s is below 10ω",
                        d.target, d.ramp
                    ));
                }
            }
            DriveForm::Tabulated(t) => t.validate()?,
            DriveForm::Zero => {}
        }
    }
    let n_t = state.thermal_occupation(mech.omega);
    Ok(SystemConfig {
        omega_tilde: mech.omega / unit,
        cavity,
        mech,
        state,
        drives,
        unit,
        spectrum,
        epsilon,
        n_t,
        warnings,
    })
}

impl SystemConfig {
    /// Frequency unit πc/L in rad/s.
    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Mirror frequency in units of πc/L.
    pub fn omega_tilde(&self) -> f64 {
        self.omega_tilde
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta_l0(&self) -> f64 {
        self.mech.delta_l0()
    }

    pub fn thermal_occupation(&self) -> f64 {
        self.n_t
    }

    /// Incoherent phonon number N_s = sinh²r + N_T cosh 2r.
    pub fn fluctuation_phonons(&self) -> f64 {
        let r = self.state.squeeze_r;
        r.sinh().powi(2) + self.n_t * (2.0 * r).cosh()
    }

    /// Anomalous moment ⟨δb δb⟩ = −e^{iφ} sinh r cosh r (2N_T + 1).
    pub fn anomalous_moment(&self) -> Complex64 {
        let r = self.state.squeeze_r;
        -Complex64::from_polar(1.0, self.state.squeeze_phi)
            * (r.sinh() * r.cosh() * (2.0 * self.n_t + 1.0))
    }

    /// N_b(0) = |β|² + sinh²r + N_T cosh 2r.
    pub fn initial_phonons(&self) -> f64 {
        self.state.beta_mag.powi(2) + self.fluctuation_phonons()
    }

    /// t_c = 2/(εω_k) in seconds.
    pub fn critical_time(&self) -> f64 {
        2.0 / (self.epsilon * self.cavity.mode_frequency(self.state.k))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn drive(&self, target: Target) -> Option<&DriveProfile> {
        self.drives.iter().find(|d| d.target == target)
    }

    /// Mode index addressed by a cavity target.
    pub fn target_mode(&self, target: Target) -> Option<usize> {
        match target {
            Target::ModeK => Some(self.state.k),
            Target::ModeKp => Some(self.state.kp),
            Target::Mechanical => None,
        }
    }

    /// Dimensionless frequency of the drive target.
    pub fn target_frequency(&self, target: Target) -> f64 {
        match self.target_mode(target) {
            Some(n) => self.spectrum.freq[n - 1],
            None => self.omega_tilde,
        }
    }

    pub fn has_cavity_drive(&self) -> bool {
        self.drives.iter().any(|d| d.target != Target::Mechanical && d.is_active())
    }

    pub fn tilde_time(&self, t: f64) -> f64 {
        t * self.unit
    }

    pub fn seconds(&self, t_tilde: f64) -> f64 {
        t_tilde / self.unit
    }

    /// Same system with a different initial state.
    pub fn with_state(&self, state: InitialState) -> Result<SystemConfig> {
        make_system(self.cavity.clone(), self.mech.clone(), state, self.drives.clone())
    }

    /// Same system with a different drive list.
    pub fn with_drives(&self, drives: Vec<DriveProfile>) -> Result<SystemConfig> {
        make_system(self.cavity.clone(), self.mech.clone(), self.state.clone(), drives)
    }
}

/// Builds a configuration directly from dimensionless parameters: cavity of
/// `num_modes` massless modes, mirror frequency ω̃ and coupling ε. The length
/// is fixed at 10 µm; only dimensionless combinations matter.
pub fn dimensionless_system(
    num_modes: usize,
    omega_tilde: f64,
    epsilon: f64,
    state: InitialState,
    drives_tilde: Vec<DriveProfile>,
) -> Result<SystemConfig> {
    dimensionless_massive_system(num_modes, 0.0, omega_tilde, epsilon, state, drives_tilde)
}

/// As [`dimensionless_system`] with field mass m̃ = M_f c L/(πħ). Ramp rates
/// and tabulated drive data are given in units of πc/L and L/(πc).
pub fn dimensionless_massive_system(
    num_modes: usize,
    mass_tilde: f64,
    omega_tilde: f64,
    epsilon: f64,
    state: InitialState,
    drives_tilde: Vec<DriveProfile>,
) -> Result<SystemConfig> {
    let length = 1e-5;
    let unit = PI * C / length;
    let cavity = CavitySpec { length, num_modes, field_mass: mass_tilde * PI * HBAR / (C * length) };
    let mech = MechanicalSpec::with_epsilon(omega_tilde * unit, epsilon, length);
    let drives = drives_tilde
        .into_iter()
        .map(|mut d| {
            d.ramp *= unit;
            if let DriveForm::Tabulated(t) = &mut d.form {
                t.times.iter_mut().for_each(|x| *x /= unit);
                t.lambda_x.iter_mut().for_each(|x| *x *= unit);
                t.lambda_p.iter_mut().for_each(|x| *x *= unit);
            }
            d
        })
        .collect();
    make_system(cavity, mech, state, drives)
}
