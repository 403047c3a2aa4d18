//! Phase-shift estimation with the OPO output as probe: Gaussian QFI,
//! homodyne FI (closed forms and noisy numerics), energy and bounds.

mod homodyne;
mod noisy;
mod qfi;

pub use homodyne::{
    fi_homodyne_gaussian, fi_homodyne_noiseless, half_period_distance, numeric_maxima,
    optimized_quadrature, split_residual, split_threshold, wrap_half_period, Branch,
    OptimizedQuadrature, QuadratureMarginal, ANGLE_SCAN, ANGLE_TOL,
};
pub use noisy::{
    fi_homodyne_noisy, fi_homodyne_noisy_fd, HomodyneModel, FD_STEP, FI_RTOL, MAX_SIMPSON_POINTS,
    SIMPSON_POINTS, TAIL_SIGMAS,
};
pub use qfi::{
    dephasing_qfi_bound, energy, qfi_gaussian, qfi_gaussian_with_purity, qfi_noiseless,
    qfi_rotation, rotation_model,
};

use crate::error::{Error, Result};
use crate::opo::OpoParams;
use crate::phase_noise::{dephase_then_opo, PhaseNoise};

/// `ε = |F_n − F_nl| / F_nl`.
pub fn relative_fluctuation(f_noisy: f64, f_noiseless: f64) -> Result<f64> {
    if f_noiseless == 0.0 {
        return Err(Error::DivisionByZero);
    }
    if !(f_noiseless > 0.0) {
        return Err(Error::range("noiseless Fisher information", f_noiseless));
    }
    Ok((f_noisy - f_noiseless).abs() / f_noiseless)
}

/// Cramér–Rao bound `1 / (M F)` on the variance of an unbiased estimator.
pub fn cramer_rao(fisher: f64, repetitions: u64) -> Result<f64> {
    if !(fisher > 0.0) {
        return Err(Error::range("Fisher information", fisher));
    }
    if repetitions == 0 {
        return Err(Error::range("repetitions", 0.0));
    }
    Ok(1.0 / (repetitions as f64 * fisher))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationReport {
    pub qfi: f64,
    pub fi: f64,
    pub phi_max: f64,
    pub branch: Branch,
    pub energy: f64,
    /// Dephasing bound `H_UB`, for noisy probes.
    pub bound: Option<f64>,
    pub epsilon: Option<f64>,
}

/// Noiseless figures of merit of the OPO output probe.
pub fn noiseless_report(opo: &OpoParams, alpha: f64, theta: f64) -> Result<EstimationReport> {
    let best = optimized_quadrature(opo, alpha, theta)?;
    Ok(EstimationReport {
        qfi: qfi_noiseless(opo, alpha)?,
        fi: best.fi,
        phi_max: best.phi_max,
        branch: best.branch,
        energy: energy(opo, alpha)?,
        bound: None,
        epsilon: None,
    })
}

/// Homodyne estimation with a dephased seed, measuring at the noiseless
/// optimal angle. `fi` is `F_n`; `epsilon` compares it with `F_nl`.
pub fn noisy_report(
    opo: &OpoParams,
    alpha: f64,
    theta: f64,
    noise: PhaseNoise,
    nodes: usize,
) -> Result<EstimationReport> {
    let clean = noiseless_report(opo, alpha, theta)?;
    let probe = dephase_then_opo(alpha, noise, opo, nodes)?;
    let f_n = fi_homodyne_noisy(&probe, theta, clean.phi_max)?;
    let bound = if noise.sigma() > 0.0 {
        Some(dephasing_qfi_bound(clean.energy, noise.sigma())?)
    } else {
        None
    };
    Ok(EstimationReport {
        fi: f_n,
        bound,
        epsilon: Some(relative_fluctuation(f_n, clean.fi)?),
        ..clean
    })
}

/// Asymptotic slope of `H_nl` against `N` for `d → 1`.
pub fn qfi_shot_noise_slope(opo: &OpoParams, alpha: f64) -> f64 {
    let x = opo.eta_in() * alpha * alpha;
    4.0 / (1.0 - opo.eta_esc()) * (1.0 + 4.0 * x) / (1.0 + 2.0 * x)
}

/// Asymptotic slope of the optimised `F_nl` against `N` for `d → 1`.
pub fn fi_shot_noise_slope(opo: &OpoParams, alpha: f64) -> f64 {
    2.0 * (1.0 + 2.0 * opo.eta_in() * alpha * alpha) / (1.0 - opo.eta_esc())
}
