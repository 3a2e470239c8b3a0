//! Quantum field in a one-dimensional cavity whose end mirror is a quantized
//! harmonic oscillator.
//!
//! The crate evaluates the perturbative expansion of the wall trajectory,
//! photon and phonon numbers and the radiation force in powers of
//! ε = δL₀/L, and checks it against exact evolution in a truncated Fock space.
//!
//! Internally frequencies are measured in units of πc/L and times in units of
//! L/(πc), so that the massless cavity spectrum is ω̃ₙ = n. SI quantities
//! appear only at the public boundary of [`model`], [`engine`] and [`force`].

pub mod aux;
pub mod cli;
pub mod engine;
pub mod force;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod units;

mod error;

pub use error::Error;
pub use model::{
    make_system, CavitySpec, DriveForm, DriveProfile, DriveTable, InitialState, MechanicalSpec,
    SystemConfig, Target, Thermal,
};

pub type Result<T> = std::result::Result<T, Error>;
