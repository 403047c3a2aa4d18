//! Single-mode Gaussian states in quadrature form.
//!
//! Conventions used throughout the crate: `[q, p] = i`, so the vacuum has
//! covariance `I/2`, and the coherent state `|α e^{iφ}⟩` has mean
//! `√2 α (cos φ, sin φ)`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub const VACUUM_VARIANCE: f64 = 0.5;

/// Largest squeezing magnitude accepted by [`GaussianState::squeeze`].
pub const MAX_SQUEEZING: f64 = 20.0;

const SYMMETRY_TOL: f64 = 1e-12;
const HEISENBERG_TOL: f64 = 1e-12;

/// `R_θ = [[cos θ, sin θ], [-sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, s, -s, c)
}

/// `dR_θ/dθ`.
pub fn rotation_derivative(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(-s, c, -c, -s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: Vec2,
    cov: Mat2,
}

impl GaussianState {
    /// Validated constructor: symmetric, positive-definite and above the
    /// Heisenberg bound `det(cov) >= 1/4`.
    pub fn new(mean: Vec2, cov: Mat2) -> Result<Self> {
        if !mean.iter().chain(cov.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidState("non-finite moments".into()));
        }
        if (cov[(0, 1)] - cov[(1, 0)]).abs() > SYMMETRY_TOL {
            return Err(Error::InvalidState("covariance is not symmetric".into()));
        }
        let det = cov.determinant();
        if cov[(0, 0)] <= 0.0 || det <= 0.0 {
            return Err(Error::InvalidState(
                "covariance is not positive-definite".into(),
            ));
        }
        if det < 0.25 - HEISENBERG_TOL {
            return Err(Error::InvalidState(format!(
                "det(cov) = {det} violates the uncertainty bound"
            )));
        }
        Ok(Self::from_parts(mean, cov))
    }

    /// Skips validation; symmetrises the covariance.
    pub(crate) fn from_parts(mean: Vec2, cov: Mat2) -> Self {
        let off = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
        let cov = Mat2::new(cov[(0, 0)], off, off, cov[(1, 1)]);
        GaussianState { mean, cov }
    }

    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    /// Thermal state with `nbar` mean photons, covariance `(1/2 + nbar) I`.
    pub fn thermal(nbar: f64) -> Self {
        GaussianState {
            mean: Vec2::zeros(),
            cov: Mat2::identity() * (VACUUM_VARIANCE + nbar),
        }
    }

    pub fn coherent(alpha: f64, phi: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::range("coherent amplitude", alpha));
        }
        let amp = std::f64::consts::SQRT_2 * alpha;
        Ok(GaussianState {
            mean: Vec2::new(amp * phi.cos(), amp * phi.sin()),
            cov: Mat2::identity() * VACUUM_VARIANCE,
        })
    }

    pub fn mean(&self) -> &Vec2 {
        &self.mean
    }

    pub fn cov(&self) -> &Mat2 {
        &self.cov
    }

    pub fn det(&self) -> f64 {
        self.cov.determinant()
    }

    /// `mean <- R_θ mean`, `cov <- R_θ cov R_θᵀ`.
    pub fn rotate(&self, theta: f64) -> Self {
        let r = rotation(theta);
        Self::from_parts(r * self.mean, r * self.cov * r.transpose())
    }

    /// Scales `q` by `e^r` and `p` by `e^{-r}`.
    pub fn squeeze(&self, r: f64) -> Result<Self> {
        if !(r.abs() <= MAX_SQUEEZING) {
            return Err(Error::range("squeezing parameter", r));
        }
        let s = Mat2::new(r.exp(), 0.0, 0.0, (-r).exp());
        Ok(Self::from_parts(s * self.mean, s * self.cov * s))
    }

    /// Beam splitter of transmissivity `eta` mixing in vacuum.
    pub fn loss(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::range("transmissivity", eta));
        }
        Ok(Self::from_parts(
            self.mean * eta.sqrt(),
            self.cov * eta + Mat2::identity() * ((1.0 - eta) * VACUUM_VARIANCE),
        ))
    }

    /// Shifts the mean by `delta`; covariance untouched.
    pub fn displace(&self, delta: Vec2) -> Self {
        GaussianState {
            mean: self.mean + delta,
            cov: self.cov,
        }
    }

    /// `1 / (2 sqrt(det cov))`.
    pub fn purity(&self) -> f64 {
        0.5 / self.det().sqrt()
    }

    /// `(tr cov + |mean|^2 - 1) / 2`.
    pub fn mean_photons(&self) -> f64 {
        0.5 * (self.cov.trace() + self.mean.norm_squared() - 1.0)
    }

    /// True when the covariance equals the vacuum one within `tol`.
    pub fn is_coherent(&self, tol: f64) -> bool {
        (self.cov - Mat2::identity() * VACUUM_VARIANCE).abs().max() <= tol
    }

    /// Mean and variance of the quadrature `x_φ = cos φ q + sin φ p`.
    pub fn quadrature_marginal(&self, phi: f64) -> (f64, f64) {
        let c = Vec2::new(phi.cos(), phi.sin());
        (c.dot(&self.mean), (c.transpose() * self.cov * c)[(0, 0)])
    }

    /// Splits a state with diagonal covariance and mean on the `q` axis into
    /// displacement, squeezing and thermal occupation.
    pub fn sts_decompose(&self) -> Result<SqueezedThermal> {
        let off = self.cov[(0, 1)];
        if off.abs() > 1e-10 {
            return Err(Error::NotDiagonal(off));
        }
        if self.mean[1].abs() > 1e-10 {
            return Err(Error::OffAxisDisplacement(self.mean[1]));
        }
        let (vq, vp) = (self.cov[(0, 0)], self.cov[(1, 1)]);
        let nbar = 0.5 * (2.0 * (vq * vp).sqrt() - 1.0);
        if nbar < -1e-10 {
            return Err(Error::NegativeThermal(nbar));
        }
        Ok(SqueezedThermal {
            beta: self.mean[0] / std::f64::consts::SQRT_2,
            xi: 0.25 * (vq / vp).ln(),
            nbar: nbar.max(0.0),
        })
    }
}

/// `D(β) S(ξ) ν_th(n̄) S(ξ)† D(β)†` with real `β` and `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedThermal {
    pub beta: f64,
    pub xi: f64,
    pub nbar: f64,
}

impl SqueezedThermal {
    pub fn to_state(&self) -> Result<GaussianState> {
        let squeezed = GaussianState::thermal(self.nbar).squeeze(self.xi)?;
        Ok(squeezed.displace(Vec2::new(std::f64::consts::SQRT_2 * self.beta, 0.0)))
    }
}
