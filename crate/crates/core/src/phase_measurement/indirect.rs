//! Indirect phase estimation from two independent homodyne detections,
//! `φ̂ = atan2(⟨p⟩, ⟨q⟩)`, with the uncertainty from variance propagation.

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::opo::OpoParams;
use crate::phase_noise::PhaseNoise;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndirectKind {
    /// The bare coherent seed.
    Seed,
    /// The seed after phase diffusion.
    Dephased,
    /// The dephased seed amplified by the OPO.
    Opo(OpoParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndirectPhaseResult {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    /// `Δ²φ` of a single-shot estimate.
    pub variance: f64,
}

impl IndirectPhaseResult {
    pub fn from_moments(mean_q: f64, mean_p: f64, var_q: f64, var_p: f64) -> Self {
        IndirectPhaseResult {
            mean_q,
            mean_p,
            var_q,
            var_p,
            variance: propagated_variance(mean_q, mean_p, var_q, var_p),
        }
    }

    /// Quadrature statistics read off the first and second moments of a state.
    pub fn from_state(state: &GaussianState) -> Self {
        let (m, v) = (state.mean(), state.cov());
        Self::from_moments(m[0], m[1], v[(0, 0)], v[(1, 1)])
    }

    pub fn estimate(&self) -> f64 {
        phase_estimate(self.mean_q, self.mean_p)
    }
}

pub fn phase_estimate(mean_q: f64, mean_p: f64) -> f64 {
    mean_p.atan2(mean_q)
}

/// First-order error propagation through `atan2(p, q)`:
/// `(q² Var p + p² Var q) / (q² + p²)²`.
pub fn propagated_variance(mean_q: f64, mean_p: f64, var_q: f64, var_p: f64) -> f64 {
    let (q2, p2) = (mean_q * mean_q, mean_p * mean_p);
    let r2 = q2 + p2;
    (q2 * var_p + p2 * var_q) / (r2 * r2)
}

/// Closed-form quadrature moments and `Δ²φ` for the seed, the dephased seed,
/// and the dephased seed after the OPO.
pub fn indirect_variance(
    kind: IndirectKind,
    alpha: f64,
    noise: PhaseNoise,
) -> Result<IndirectPhaseResult> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::range("coherent amplitude", alpha));
    }
    let s2 = noise.sigma() * noise.sigma();
    // ⟨cos ψ⟩ and the variances of cos ψ, sin ψ for ψ ~ N(0, σ²)
    let mean_cos = (-0.5 * s2).exp();
    let var_cos = 0.5 * (1.0 - (-s2).exp()).powi(2);
    let var_sin = 0.5 * (1.0 - (-2.0 * s2).exp());
    let (aq, ap, sq, sp) = match kind {
        IndirectKind::Seed => {
            let (m, v) = (std::f64::consts::SQRT_2 * alpha, 0.5);
            return Ok(IndirectPhaseResult {
                mean_q: m,
                mean_p: 0.0,
                var_q: v,
                var_p: v,
                variance: 1.0 / (4.0 * alpha * alpha),
            });
        }
        IndirectKind::Dephased => (alpha, alpha, 0.5, 0.5),
        IndirectKind::Opo(opo) => {
            let m = opo.output_moments(alpha)?;
            (m.alpha_q_tilde, m.alpha_p_tilde, m.sigma2_q, m.sigma2_p)
        }
    };
    let var_q = sq + 2.0 * aq * aq * var_cos;
    let var_p = sp + 2.0 * ap * ap * var_sin;
    let variance = s2.exp() * sp / (2.0 * aq * aq) + (ap * ap) / (aq * aq) * s2.sinh();
    Ok(IndirectPhaseResult {
        mean_q: std::f64::consts::SQRT_2 * aq * mean_cos,
        mean_p: 0.0,
        var_q,
        var_p,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_noise::{dephase, dephase_then_opo};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn noise(s: f64) -> PhaseNoise {
        PhaseNoise::new(s).unwrap()
    }

    #[test]
    fn seed_variance() {
        let r = indirect_variance(IndirectKind::Seed, 2.0, PhaseNoise::none()).unwrap();
        assert_eq!(r.variance, 0.0625);
        assert!(
            (r.variance - propagated_variance(r.mean_q, r.mean_p, r.var_q, r.var_p)).abs() < 1e-16
        );
    }

    #[test]
    fn reference_values() {
        let opo = OpoParams::realistic(0.4).unwrap();
        let d = indirect_variance(IndirectKind::Dephased, 2.0, noise(FRAC_PI_4)).unwrap();
        let o = indirect_variance(IndirectKind::Opo(opo), 2.0, noise(FRAC_PI_4)).unwrap();
        assert!((d.variance - 0.772_538_0).abs() < 1e-7, "{}", d.variance);
        assert!((o.variance - 0.390_532_8).abs() < 1e-7, "{}", o.variance);
        assert!(o.variance < d.variance);
    }

    #[test]
    fn closed_forms_in_textbook_shape() {
        let opo = OpoParams::realistic(0.4).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let m = opo.output_moments(alpha).unwrap();
            for sigma in [0.1, FRAC_PI_8, FRAC_PI_4] {
                let s2: f64 = sigma * sigma;
                let d = indirect_variance(IndirectKind::Dephased, alpha, noise(sigma)).unwrap();
                let want = s2.exp() / (4.0 * alpha * alpha) + s2.sinh();
                assert!((d.variance - want).abs() < 1e-12 * want);
                let o = indirect_variance(IndirectKind::Opo(opo), alpha, noise(sigma)).unwrap();
                let aq2 = m.alpha_q_tilde * m.alpha_q_tilde;
                let want =
                    s2.exp() / (2.0 * aq2) * m.sigma2_p + m.alpha_p_tilde.powi(2) / aq2 * s2.sinh();
                assert!((o.variance - want).abs() < 1e-12 * want);
                // mean_p = 0 ⇒ Δ²φ = Var p / ⟨q⟩²
                for r in [d, o] {
                    assert!(
                        (r.variance - r.var_p / (r.mean_q * r.mean_q)).abs() < 1e-12 * r.variance
                    );
                }
            }
        }
    }

    #[test]
    fn mixture_moments_agree() {
        let opo = OpoParams::realistic(0.4).unwrap();
        for sigma in [0.1, FRAC_PI_8, FRAC_PI_4] {
            let d = IndirectPhaseResult::from_state(
                &dephase(2.0, noise(sigma), 201).unwrap().moments(),
            );
            let closed = indirect_variance(IndirectKind::Dephased, 2.0, noise(sigma)).unwrap();
            assert!((d.variance - closed.variance).abs() < 1e-8 * closed.variance);
            let o = IndirectPhaseResult::from_state(
                &dephase_then_opo(2.0, noise(sigma), &opo, 201)
                    .unwrap()
                    .moments(),
            );
            let closed = indirect_variance(IndirectKind::Opo(opo), 2.0, noise(sigma)).unwrap();
            assert!((o.var_q - closed.var_q).abs() < 1e-8 * closed.var_q);
            assert!((o.variance - closed.variance).abs() < 1e-8 * closed.variance);
        }
    }

    #[test]
    fn dephasing_always_hurts() {
        for sigma in [1e-3, 0.1, 0.5, 1.0, 2.0] {
            let d = indirect_variance(IndirectKind::Dephased, 1.3, noise(sigma)).unwrap();
            let s = indirect_variance(IndirectKind::Seed, 1.3, noise(sigma)).unwrap();
            assert!(d.variance > s.variance);
        }
    }

    #[test]
    fn non_positive_amplitude_is_rejected() {
        assert!(indirect_variance(IndirectKind::Seed, 0.0, PhaseNoise::none()).is_err());
        assert!(indirect_variance(IndirectKind::Dephased, -1.0, PhaseNoise::none()).is_err());
    }

    #[test]
    fn estimate_of_rotated_moments() {
        let r = IndirectPhaseResult::from_moments(1.0, 1.0, 0.5, 0.5);
        assert!((r.estimate() - FRAC_PI_4).abs() < 1e-15);
        assert!((r.variance - 0.25).abs() < 1e-15);
    }
}
