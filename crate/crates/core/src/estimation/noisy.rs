use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, simpson};
use crate::phase_noise::GaussianMixture;

use super::homodyne::QuadratureMarginal;

pub const SIMPSON_POINTS: usize = 4001;
pub const MAX_SIMPSON_POINTS: usize = 256_001;
pub const FI_RTOL: f64 = 1e-6;
/// Half-width of the integration window in component standard deviations.
pub const TAIL_SIGMAS: f64 = 12.0;
pub const FD_STEP: f64 = 1e-5;

const DENSITY_FLOOR: f64 = 1e-300;

/// Homodyne detection of `x_φ` on a mixture probe carrying the phase `θ`.
#[derive(Debug, Clone)]
pub struct HomodyneModel {
    pub mixture: GaussianMixture,
    pub theta: f64,
    pub phi: f64,
}

impl HomodyneModel {
    pub fn new(mixture: GaussianMixture, theta: f64, phi: f64) -> Self {
        HomodyneModel {
            mixture,
            theta,
            phi,
        }
    }

    /// Weighted component marginals at `θ`.
    pub fn marginals_at(&self, theta: f64) -> Vec<(f64, QuadratureMarginal)> {
        self.mixture
            .components()
            .iter()
            .map(|c| (c.weight, QuadratureMarginal::of(&c.state, theta, self.phi)))
            .collect()
    }

    pub fn marginals(&self) -> Vec<(f64, QuadratureMarginal)> {
        self.marginals_at(self.theta)
    }

    pub fn density(&self, x: f64) -> f64 {
        density(&self.marginals(), x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.marginals()
            .iter()
            .map(|(w, m)| w * normal_cdf((x - m.mean) / m.var.sqrt()))
            .sum()
    }

    /// Integration window covering every component mean ± 12 standard deviations.
    pub fn window(&self) -> (f64, f64) {
        window(&self.marginals())
    }

    /// Fisher information with analytic θ-derivatives of the density.
    pub fn fisher(&self) -> Result<f64> {
        let marginals = self.marginals();
        let (a, b) = window(&marginals);
        converge(|points| {
            simpson(
                |x| {
                    let (p, dp) = density_and_derivative(&marginals, x);
                    if p < DENSITY_FLOOR {
                        0.0
                    } else {
                        dp * dp / p
                    }
                },
                a,
                b,
                points,
            )
        })
    }

    /// Fisher information with the θ-derivative taken by central differences
    /// of step `h`.
    pub fn fisher_finite_difference(&self, h: f64) -> Result<f64> {
        let centre = self.marginals();
        let plus = self.marginals_at(self.theta + h);
        let minus = self.marginals_at(self.theta - h);
        let (a, b) = window(&centre);
        converge(|points| {
            simpson(
                |x| {
                    let p = density(&centre, x);
                    if p < DENSITY_FLOOR {
                        return 0.0;
                    }
                    let dp = (density(&plus, x) - density(&minus, x)) / (2.0 * h);
                    dp * dp / p
                },
                a,
                b,
                points,
            )
        })
    }
}

fn window(marginals: &[(f64, QuadratureMarginal)]) -> (f64, f64) {
    marginals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, m)| {
            let reach = TAIL_SIGMAS * m.var.sqrt();
            (lo.min(m.mean - reach), hi.max(m.mean + reach))
        })
}

fn gaussian(x: f64, m: &QuadratureMarginal) -> f64 {
    let z = x - m.mean;
    (-0.5 * z * z / m.var).exp() / (2.0 * PI * m.var).sqrt()
}

fn density(marginals: &[(f64, QuadratureMarginal)], x: f64) -> f64 {
    marginals.iter().map(|(w, m)| w * gaussian(x, m)).sum()
}

fn density_and_derivative(marginals: &[(f64, QuadratureMarginal)], x: f64) -> (f64, f64) {
    marginals.iter().fold((0.0, 0.0), |(p, dp), (w, m)| {
        let g = w * gaussian(x, m);
        let z = x - m.mean;
        let score = z * m.d_mean / m.var + 0.5 * m.d_var / m.var * (z * z / m.var - 1.0);
        (p + g, dp + g * score)
    })
}

/// Doubles the Simpson resolution until two successive estimates agree to
/// [`FI_RTOL`].
fn converge<F: FnMut(usize) -> f64>(mut integrate: F) -> Result<f64> {
    let mut points = SIMPSON_POINTS;
    let mut prev = integrate(points);
    loop {
        let next_points = 2 * (points - 1) + 1;
        let next = integrate(next_points);
        let change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        if change <= FI_RTOL {
            return Ok(next);
        }
        if next_points >= MAX_SIMPSON_POINTS {
            return Err(Error::IntegrationNotConverged {
                change,
                points: next_points,
            });
        }
        points = next_points;
        prev = next;
    }
}

/// `F_n`: homodyne FI of `x_φ` on a noisy mixture probe.
pub fn fi_homodyne_noisy(probe: &GaussianMixture, theta: f64, phi: f64) -> Result<f64> {
    HomodyneModel::new(probe.clone(), theta, phi).fisher()
}

/// [`fi_homodyne_noisy`] with finite-difference θ-derivatives.
pub fn fi_homodyne_noisy_fd(probe: &GaussianMixture, theta: f64, phi: f64, h: f64) -> Result<f64> {
    HomodyneModel::new(probe.clone(), theta, phi).fisher_finite_difference(h)
}
