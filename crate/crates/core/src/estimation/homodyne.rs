use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::gaussian::{rotation, rotation_derivative, GaussianState, Vec2};
use crate::numerics::{golden_max, try_bisect};
use crate::opo::{d_from_squeezing, squeezing_from_d, OpoParams, D_MAX};

pub const ANGLE_SCAN: usize = 256;
pub const ANGLE_TOL: f64 = 1e-7;

/// Mean and variance of `x_φ` for the state rotated by `θ`, and their
/// θ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMarginal {
    pub mean: f64,
    pub var: f64,
    pub d_mean: f64,
    pub d_var: f64,
}

impl QuadratureMarginal {
    pub fn of(state: &GaussianState, theta: f64, phi: f64) -> Self {
        let c = Vec2::new(phi.cos(), phi.sin());
        let (r, dr) = (rotation(theta), rotation_derivative(theta));
        let (m, v) = (state.mean(), state.cov());
        let u = r.transpose() * c;
        let du = dr.transpose() * c;
        QuadratureMarginal {
            mean: u.dot(m),
            var: u.dot(&(v * u)),
            d_mean: du.dot(m),
            d_var: 2.0 * du.dot(&(v * u)),
        }
    }

    /// Fisher information of the Gaussian `N(mean(θ), var(θ))`.
    pub fn fisher(&self) -> f64 {
        self.d_mean * self.d_mean / self.var + self.d_var * self.d_var / (2.0 * self.var * self.var)
    }
}

/// FI of homodyning `x_φ` on a Gaussian state subject to a phase rotation `θ`.
pub fn fi_homodyne_gaussian(state: &GaussianState, theta: f64, phi: f64) -> f64 {
    QuadratureMarginal::of(state, theta, phi).fisher()
}

/// FI of homodyning `x_φ` on the OPO output for a real seed `alpha`.
pub fn fi_homodyne_noiseless(opo: &OpoParams, alpha: f64, theta: f64, phi: f64) -> Result<f64> {
    Ok(fi_homodyne_gaussian(
        &opo.output_state(alpha, 0.0)?,
        theta,
        phi,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Single maximum at `π/2 − θ`.
    Single,
    /// Two symmetric maxima at `π/2 − θ ∓ χ/2`.
    Split,
}

impl Branch {
    pub fn index(&self) -> u8 {
        match self {
            Branch::Single => 1,
            Branch::Split => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedQuadrature {
    pub phi_max: f64,
    pub fi: f64,
    pub branch: Branch,
    /// `cos χ`; outside `[-1, 1]` on the single-maximum branch.
    pub cos_chi: f64,
}

/// Closed-form optimal homodyne angle for the OPO output.
pub fn optimized_quadrature(
    opo: &OpoParams,
    alpha: f64,
    theta: f64,
) -> Result<OptimizedQuadrature> {
    let m = opo.output_moments(alpha)?;
    let (sq, sp, aq2) = (m.sigma2_q, m.sigma2_p, m.alpha_q_tilde.powi(2));
    let single = FRAC_PI_2 - theta;
    let f1 = 2.0 * aq2 / sp;
    let diff = sq - sp;
    if opo.d() == 0.0 {
        return Ok(OptimizedQuadrature {
            phi_max: single,
            fi: f1,
            branch: Branch::Single,
            cos_chi: f64::NAN,
        });
    }
    let cos_chi =
        (diff.powi(3) + sq * aq2 * (sq + sp)) / ((sq + sp) * diff * diff + sq * aq2 * diff);
    if cos_chi.abs() <= 1.0 {
        let chi = cos_chi.acos();
        let f2 = (diff * diff + sq * aq2).powi(2) / (2.0 * sq * sp * diff * diff);
        Ok(OptimizedQuadrature {
            phi_max: single - 0.5 * chi,
            fi: f2,
            branch: Branch::Split,
            cos_chi,
        })
    } else {
        Ok(OptimizedQuadrature {
            phi_max: single,
            fi: f1,
            branch: Branch::Single,
            cos_chi,
        })
    }
}

/// Local maxima of `φ ↦ F(φ)` over one period `[-π/2, π/2)`, from a
/// [`ANGLE_SCAN`]-point scan refined by golden-section search.
pub fn numeric_maxima<F: Fn(f64) -> f64>(fi: F) -> Vec<(f64, f64)> {
    let step = PI / ANGLE_SCAN as f64;
    let grid: Vec<f64> = (0..ANGLE_SCAN)
        .map(|k| -FRAC_PI_2 + step * k as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| fi(x)).collect();
    let n = grid.len();
    (0..n)
        .filter(|&k| values[k] > values[(k + n - 1) % n] && values[k] >= values[(k + 1) % n])
        .filter_map(|k| {
            let x = golden_max(&fi, grid[k] - step, grid[k] + step, ANGLE_TOL).ok()?;
            Some((x, fi(x)))
        })
        .collect()
}

/// Residual `α̃_q − (Σ²_q − Σ²_p)/√Σ²_q` of the split-branch condition as a
/// function of the squeezing `r`.
pub fn split_residual(opo: &OpoParams, alpha: f64, r: f64) -> Result<f64> {
    let m = opo.with_d(d_from_squeezing(r))?.output_moments(alpha)?;
    Ok(m.alpha_q_tilde - (m.sigma2_q - m.sigma2_p) / m.sigma2_q.sqrt())
}

/// Squeezing at which the FI maximum splits in two.
pub fn split_threshold(opo: &OpoParams, alpha: f64, tol: f64) -> Result<f64> {
    try_bisect(
        |r| split_residual(opo, alpha, r),
        0.0,
        squeezing_from_d(D_MAX),
        tol,
    )
}

/// Wraps an angle into `[-π/2, π/2)`, the period of the homodyne FI.
pub fn wrap_half_period(x: f64) -> f64 {
    (x + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2
}

/// Distance between two angles modulo `π`.
pub fn half_period_distance(a: f64, b: f64) -> f64 {
    wrap_half_period(a - b).abs()
}
