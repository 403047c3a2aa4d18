//! The optical parametric oscillator as a Gaussian channel.
//!
//! Two routes to the same output state are provided: the stationary
//! input–output moments ([`OpoParams::output_moments`]) and the equivalent
//! block scheme ([`OpoParams::apply`]) built from loss, phase-sensitive gain,
//! phase-sensitive phase shift, squeezing and loss again. They agree to
//! rounding for every coherent input.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Mat2, Vec2};

/// Stability cap on the pump ratio `d`; moments diverge as `d -> 1`.
pub const D_MAX: f64 = 0.999;

/// Input-coupler and escape ratios of the reference device.
pub const REALISTIC_ETA_IN: f64 = 0.01;
pub const REALISTIC_ETA_ESC: f64 = 0.93;

/// Effective squeezing `r = ln[(1 + d) / (1 - d)]`.
pub fn squeezing_from_d(d: f64) -> f64 {
    ((1.0 + d) / (1.0 - d)).ln()
}

/// Inverse of [`squeezing_from_d`].
pub fn d_from_squeezing(r: f64) -> f64 {
    (0.5 * r).tanh()
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoParams {
    d: f64,
    eta_in: f64,
    eta_esc: f64,
}

impl OpoParams {
    pub fn new(d: f64, eta_in: f64, eta_esc: f64) -> Result<Self> {
        if !(0.0..=D_MAX).contains(&d) {
            return Err(Error::range("pump ratio d", d));
        }
        if !(0.0..1.0).contains(&eta_in) {
            return Err(Error::range("input-coupler ratio", eta_in));
        }
        if !(eta_esc > 0.0 && eta_esc <= 1.0) {
            return Err(Error::range("escape ratio", eta_esc));
        }
        if eta_in + eta_esc > 1.0 + 1e-15 {
            return Err(Error::range("eta_in + eta_esc", eta_in + eta_esc));
        }
        Ok(OpoParams { d, eta_in, eta_esc })
    }

    /// `eta_in = 0.01`, `eta_esc = 0.93`.
    pub fn realistic(d: f64) -> Result<Self> {
        Self::new(d, REALISTIC_ETA_IN, REALISTIC_ETA_ESC)
    }

    pub fn with_d(&self, d: f64) -> Result<Self> {
        Self::new(d, self.eta_in, self.eta_esc)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn eta_in(&self) -> f64 {
        self.eta_in
    }

    pub fn eta_esc(&self) -> f64 {
        self.eta_esc
    }

    /// Crystal-loss ratio, `(1 - eta_in - eta_esc) / 2`.
    pub fn eta_cr(&self) -> f64 {
        (0.5 * (1.0 - self.eta_in - self.eta_esc)).max(0.0)
    }

    pub fn squeezing(&self) -> f64 {
        squeezing_from_d(self.d)
    }

    /// Stationary output moments for a coherent seed of amplitude `alpha`.
    pub fn output_moments(&self, alpha: f64) -> Result<OpoOutputMoments> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::range("coherent amplitude", alpha));
        }
        let d = self.d;
        let coupling = 2.0 * (self.eta_in * self.eta_esc).sqrt() * alpha;
        Ok(OpoOutputMoments {
            alpha_q_tilde: coupling / (1.0 - d),
            alpha_p_tilde: coupling / (1.0 + d),
            sigma2_q: 0.5 * (1.0 + self.eta_esc * 4.0 * d / ((1.0 - d) * (1.0 - d))),
            sigma2_p: 0.5 * (1.0 - self.eta_esc * 4.0 * d / ((1.0 + d) * (1.0 + d))),
        })
    }

    /// Output state for the seed `|alpha e^{i phi_in}⟩` from the closed-form
    /// moments.
    pub fn output_state(&self, alpha: f64, phi_in: f64) -> Result<GaussianState> {
        Ok(self.output_moments(alpha)?.state(phi_in))
    }

    /// Gain, phase shift and squeezing of the block scheme for a seed at
    /// phase `phi_in`.
    pub fn block_factors(&self, phi_in: f64) -> BlockSchemeFactors {
        let d = self.d;
        let gain = 2.0 * (1.0 - 2.0 * d * (2.0 * phi_in).cos() + d * d).sqrt() / (1.0 - d * d);
        let (s, c) = phi_in.sin_cos();
        let pre_squeeze = ((1.0 + d) * s).atan2((1.0 - d) * c);
        BlockSchemeFactors {
            gain,
            phase_shift: wrap_angle(pre_squeeze - phi_in),
            r: self.squeezing(),
        }
    }

    /// Magnitude and phase of `⟨a_out⟩ / (2 sqrt(eta_in eta_esc))`.
    pub fn amplified_mean(&self, alpha: f64, phi_in: f64) -> AmplifiedMean {
        let d = self.d;
        let (s, c) = phi_in.sin_cos();
        AmplifiedMean {
            alpha_out: alpha * (1.0 + 2.0 * d * (2.0 * phi_in).cos() + d * d).sqrt()
                / (1.0 - d * d),
            phi_out: ((1.0 - d) * s).atan2((1.0 + d) * c),
            pre_squeeze_phase: ((1.0 + d) * s).atan2((1.0 - d) * c),
        }
    }

    /// Block-scheme action on a coherent input:
    /// loss(eta_in), gain, phase shift, squeeze(r), loss(eta_esc).
    pub fn apply(&self, input: &GaussianState) -> Result<GaussianState> {
        if !input.is_coherent(1e-10) {
            return Err(Error::NotCoherent);
        }
        let m = input.mean();
        let phi_in = m[1].atan2(m[0]);
        let f = self.block_factors(phi_in);

        let seeded = input.loss(self.eta_in)?;
        let amplified = GaussianState::from_parts(seeded.mean() * f.gain, *seeded.cov());
        let shifted = amplified.rotate(-f.phase_shift);
        shifted.squeeze(f.r)?.loss(self.eta_esc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoOutputMoments {
    pub alpha_q_tilde: f64,
    pub alpha_p_tilde: f64,
    pub sigma2_q: f64,
    pub sigma2_p: f64,
}

impl OpoOutputMoments {
    /// Mean `√2 (α̃_q cos φ_in, α̃_p sin φ_in)`, covariance `diag(Σ²_q, Σ²_p)`.
    pub fn state(&self, phi_in: f64) -> GaussianState {
        GaussianState::from_parts(
            Vec2::new(
                SQRT_2 * self.alpha_q_tilde * phi_in.cos(),
                SQRT_2 * self.alpha_p_tilde * phi_in.sin(),
            ),
            Mat2::new(self.sigma2_q, 0.0, 0.0, self.sigma2_p),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSchemeFactors {
    /// Phase-sensitive amplification applied before the squeezer.
    pub gain: f64,
    /// Phase-sensitive rotation, in `(-π/2, π/2)`.
    pub phase_shift: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifiedMean {
    pub alpha_out: f64,
    /// Direction of the output mean in the `(q, p)` plane.
    pub phi_out: f64,
    /// Direction after gain and phase shift, before the squeezer.
    pub pre_squeeze_phase: f64,
}
