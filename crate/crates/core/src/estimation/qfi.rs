use crate::error::{Error, Result};
use crate::gaussian::{rotation, rotation_derivative, GaussianState, Mat2, Vec2};
use crate::opo::OpoParams;

/// Below this distance from one the state is treated as pure.
const PURE_TOL: f64 = 1e-12;

/// Quantum Fisher information of a single-mode Gaussian model from the
/// parameter derivatives of its first and second moments.
///
/// `H = ½ Tr[(σ⁻¹σ′)²] / (1 + μ²) + 2μ′² / (1 − μ⁴) + R′ᵀ σ⁻¹ R′`, with the
/// purity derivative `μ′ = −½ μ Tr(σ⁻¹σ′)` taken from `d_cov`.
pub fn qfi_gaussian(state: &GaussianState, d_mean: &Vec2, d_cov: &Mat2) -> Result<f64> {
    let inv = inverse(state)?;
    let mu = state.purity();
    let d_purity = -0.5 * mu * (inv * d_cov).trace();
    qfi_gaussian_with_purity(state, d_mean, d_cov, d_purity)
}

/// [`qfi_gaussian`] with an explicitly supplied purity derivative.
pub fn qfi_gaussian_with_purity(
    state: &GaussianState,
    d_mean: &Vec2,
    d_cov: &Mat2,
    d_purity: f64,
) -> Result<f64> {
    let inv = inverse(state)?;
    let mu = state.purity();
    let a = inv * d_cov;
    let cov_term = 0.5 * (a * a).trace() / (1.0 + mu * mu);
    let purity_term = if 1.0 - mu < PURE_TOL {
        if d_purity.abs() > PURE_TOL {
            return Err(Error::SingularPurity);
        }
        0.0
    } else {
        2.0 * d_purity * d_purity / (1.0 - mu.powi(4))
    };
    let mean_term = d_mean.dot(&(inv * d_mean));
    Ok(cov_term + purity_term + mean_term)
}

fn inverse(state: &GaussianState) -> Result<Mat2> {
    state
        .cov()
        .try_inverse()
        .ok_or_else(|| Error::InvalidState("singular covariance".into()))
}

/// The rotation model `ρ(θ) = R_θ ρ R_θᵀ` at `θ`: the rotated state and the
/// θ-derivatives of its mean and covariance.
pub fn rotation_model(state: &GaussianState, theta: f64) -> (GaussianState, Vec2, Mat2) {
    let (r, dr) = (rotation(theta), rotation_derivative(theta));
    let (m, v) = (state.mean(), state.cov());
    let d_mean = dr * m;
    let d_cov = dr * v * r.transpose() + r * v * dr.transpose();
    (state.rotate(theta), d_mean, d_cov)
}

/// QFI of the rotation model. Rotations preserve the determinant, so the
/// purity derivative is exactly zero.
pub fn qfi_rotation(state: &GaussianState, theta: f64) -> Result<f64> {
    let (rotated, d_mean, d_cov) = rotation_model(state, theta);
    qfi_gaussian_with_purity(&rotated, &d_mean, &d_cov, 0.0)
}

/// Closed-form QFI of the OPO output under a phase rotation,
/// `4(Σ²_q − Σ²_p)² / (1 + 4Σ²_qΣ²_p) + 2α̃²_q / Σ²_p`.
pub fn qfi_noiseless(opo: &OpoParams, alpha: f64) -> Result<f64> {
    let m = opo.output_moments(alpha)?;
    let (sq, sp) = (m.sigma2_q, m.sigma2_p);
    Ok(4.0 * (sq - sp).powi(2) / (1.0 + 4.0 * sq * sp) + 2.0 * m.alpha_q_tilde.powi(2) / sp)
}

/// Mean photon number of the OPO output for a real seed.
pub fn energy(opo: &OpoParams, alpha: f64) -> Result<f64> {
    Ok(opo.output_state(alpha, 0.0)?.mean_photons())
}

/// Upper bound on the QFI of a state with `n` photons under Gaussian phase
/// noise `sigma`, `4N / (1 + 4Nσ²)`.
pub fn dephasing_qfi_bound(n: f64, sigma: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return Err(Error::range("mean photon number", n));
    }
    if !(sigma > 0.0) {
        return Err(Error::range("phase-noise amplitude", sigma));
    }
    Ok(4.0 * n / (1.0 + 4.0 * n * sigma * sigma))
}
