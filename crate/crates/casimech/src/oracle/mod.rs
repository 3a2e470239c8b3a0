//! Brute-force evolution in a truncated Fock space, used to validate the
//! perturbative engine.

mod compare;
mod fock;
mod propagate;
mod state;

pub use compare::{compare_with_perturbative, scaling_exponent, ErrorReport, OrderError, Scenario};
pub use fock::{Basis, FockOperator, SystemOperators, Truncation, DIMENSION_CAP};
pub use propagate::{
    evolve, lanczos_expm, DriveConvention, EvolveOptions, Oracle, OracleSample, Trajectory, LEAKAGE_LIMIT,
};
pub use state::{coherent, dst_members, initial_state, FockDensity, WEIGHT_CUTOFF};

use crate::model::SystemConfig;
use crate::Result;

/// Initial ensemble of `cfg` on the basis of `trunc`.
pub fn initial_density(cfg: &SystemConfig, trunc: &Truncation) -> Result<FockDensity> {
    trunc.validate(cfg)?;
    initial_state(cfg, &Basis::new(trunc.dims()), &trunc.modes)
}
