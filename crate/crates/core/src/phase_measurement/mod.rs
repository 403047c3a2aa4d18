//! Direct (heterodyne) and indirect (two-homodyne) phase measurements.

mod density;
mod indirect;
mod thresholds;

pub use density::{
    hwhm, phase_density, phase_grid, PhaseDensity, PhaseDistribution, DEFAULT_GRID, MIN_GRID,
    NORMALIZATION_TOL,
};
pub use indirect::{
    indirect_variance, phase_estimate, propagated_variance, IndirectKind, IndirectPhaseResult,
};
pub use thresholds::{
    gamma_dephased, gamma_out, gamma_seed, gamma_squeezed, indirect_crossing, threshold_alpha,
    threshold_d, threshold_d_residual, threshold_sigma_direct, threshold_sigma_indirect,
    HwhmSettings, Threshold, SCAN_POINTS,
};
