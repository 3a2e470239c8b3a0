//! Oracle against engine: deviations per perturbative order and the
//! ε-scaling of the residual.

use serde::{Deserialize, Serialize};

use super::fock::{Basis, Truncation};
use super::propagate::{EvolveOptions, Oracle, Trajectory};
use super::state::initial_state;
use crate::engine::{phonon_number, photon_number, wall_position, Approximation};
use crate::model::SystemConfig;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// ⟨b + b†⟩ against x̃⁽¹⁾ + εx̃⁽²⁾ + ε²x⁽³⁾.
    Wall,
    PhotonK,
    Phonon,
    /// Photon number of mode k at ω = ω_k + ω_k′.
    Nondegenerate,
    /// Photon number of mode k of a massive field.
    MassivePhoton,
}

impl Scenario {
    /// Power of ε carried by the leading engine term (x/L − 1 starts at ε).
    fn first_order(self) -> usize {
        match self {
            Scenario::Wall => 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderError {
    /// Highest power of ε retained in the engine value (of x/L − 1 for the
    /// wall).
    pub order: usize,
    /// max|oracle − engine| / max|oracle|.
    pub max_rel: f64,
    /// RMS of (oracle − engine) / max|oracle|.
    pub rms_rel: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub scenario: Scenario,
    pub epsilon: f64,
    /// Seconds.
    pub times: Vec<f64>,
    pub oracle: Vec<f64>,
    /// Engine value at the highest order.
    pub engine: Vec<f64>,
    pub per_order: Vec<OrderError>,
    pub purity_drift: f64,
    pub max_leakage: f64,
    pub valid: bool,
}

impl ErrorReport {
    /// Deviation of the highest-order engine value.
    pub fn deviation(&self) -> &OrderError {
        self.per_order.last().expect("at least one order")
    }
}

/// Runs oracle and engine over `t_grid` (seconds) and compares them.
pub fn compare_with_perturbative(
    cfg: &SystemConfig,
    trunc: &Truncation,
    scenario: Scenario,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<ErrorReport> {
    let oracle = Oracle::new(cfg, trunc)?;
    let rho = initial_state(cfg, &Basis::new(trunc.dims()), &trunc.modes)?;
    let traj = oracle.evolve(&rho, t_grid, opts)?;
    let observed = observable(cfg, scenario, &traj)?;
    let eps = cfg.epsilon();
    let mut partial: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(t_grid.len())).collect();
    for &t in t_grid {
        let terms = engine_terms(cfg, scenario, t)?;
        let mut acc = 0.0;
        for (j, c) in terms.iter().enumerate() {
            acc += eps.powi(j as i32) * c;
            partial[j].push(acc);
        }
    }
    let scale = observed.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let per_order = partial
        .iter()
        .enumerate()
        .map(|(order, e)| {
            let d: Vec<f64> = observed.iter().zip(e).map(|(o, e)| o - e).collect();
            let max_abs = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let rms = (d.iter().map(|x| x * x).sum::<f64>() / d.len().max(1) as f64).sqrt();
            let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
            OrderError { order: order + scenario.first_order(), max_rel: rel(max_abs), rms_rel: rel(rms), max_abs }
        })
        .collect();
    Ok(ErrorReport {
        scenario,
        epsilon: eps,
        times: t_grid.to_vec(),
        oracle: observed,
        engine: partial.pop().unwrap_or_default(),
        per_order,
        purity_drift: traj.purity_drift(),
        max_leakage: traj.max_leakage(),
        valid: traj.valid,
    })
}

fn observable(cfg: &SystemConfig, scenario: Scenario, traj: &Trajectory) -> Result<Vec<f64>> {
    Ok(match scenario {
        Scenario::Wall => traj.samples.iter().map(|s| s.q_b).collect(),
        Scenario::Phonon => traj.samples.iter().map(|s| s.phonons).collect(),
        Scenario::PhotonK | Scenario::Nondegenerate | Scenario::MassivePhoton => traj
            .photons_of(cfg.state.k)
            .ok_or_else(|| Error::invalid("truncation.modes", "mode k is not retained"))?,
    })
}

/// Coefficients of εʲ in the engine prediction of the scenario observable.
fn engine_terms(cfg: &SystemConfig, scenario: Scenario, t: f64) -> Result<Vec<f64>> {
    Ok(match scenario {
        Scenario::Wall => {
            let w = wall_position(cfg, t, 3, Approximation::Full)?;
            vec![w.x1_tilde, w.x2_tilde, w.x3]
        }
        Scenario::Phonon => {
            let n = phonon_number(cfg, t, 2, Approximation::Full)?;
            vec![n.order0, n.order1, n.order2]
        }
        Scenario::PhotonK | Scenario::Nondegenerate | Scenario::MassivePhoton => {
            let n = photon_number(cfg, cfg.state.k, t, 2, Approximation::Full)?;
            vec![n.order0, n.order1, n.order2]
        }
    })
}

/// Exponent p of the residual |oracle − engine| ∝ εᵖ from two runs on the
/// same dimensionless time grid.
pub fn scaling_exponent(a: &ErrorReport, b: &ErrorReport) -> Result<f64> {
    if a.scenario != b.scenario || a.epsilon == b.epsilon {
        return Err(Error::invalid("reports", "need one scenario at two couplings"));
    }
    let (ra, rb) = (a.deviation().max_abs, b.deviation().max_abs);
    if !(ra > 0.0 && rb > 0.0) {
        return Err(Error::Numerical("vanishing residual".into()));
    }
    Ok((rb / ra).ln() / (b.epsilon / a.epsilon).ln())
}
