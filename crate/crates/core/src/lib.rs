//! Phase-noise mitigation with a realistic optical parametric oscillator.

pub mod cli;
pub mod error;
pub mod estimation;
pub mod gaussian;
pub mod mc_oracle;
pub mod numerics;
pub mod opo;
pub mod phase_measurement;
pub mod phase_noise;

pub use error::{Error, Result};
