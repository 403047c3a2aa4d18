//! Gaussian phase diffusion as a discrete mixture of rotated coherent states.
//!
//! The diffusion integral over `ψ ~ N(0, σ²)` is discretised with an odd
//! Gauss–Hermite rule through `ψ = √2 σ t`, so the node set always contains
//! `ψ = 0` and is mirror-symmetric.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Mat2, Vec2};
use crate::numerics::gauss_hermite;
use crate::opo::OpoParams;

pub const DEFAULT_NODES: usize = 201;
pub const MAX_SIGMA: f64 = 2.0 * PI;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNoise {
    sigma: f64,
}

impl PhaseNoise {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(0.0..=MAX_SIGMA).contains(&sigma) {
            return Err(Error::range("phase-noise amplitude", sigma));
        }
        Ok(PhaseNoise { sigma })
    }

    pub fn none() -> Self {
        PhaseNoise { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: GaussianState,
}

/// Convex combination of Gaussian states; weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        if let Some(c) = components.iter().find(|c| !(c.weight > 0.0)) {
            return Err(Error::InvalidMixture(format!(
                "non-positive weight {}",
                c.weight
            )));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(GaussianMixture { components })
    }

    pub fn single(state: GaussianState) -> Self {
        GaussianMixture {
            components: vec![MixtureComponent { weight: 1.0, state }],
        }
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Applies `f` to every component state, keeping the weights.
    pub fn try_map<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&GaussianState) -> Result<GaussianState>,
    {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(MixtureComponent {
                    weight: c.weight,
                    state: f(&c.state)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GaussianMixture { components })
    }

    pub fn rotate(&self, theta: f64) -> Self {
        GaussianMixture {
            components: self
                .components
                .iter()
                .map(|c| MixtureComponent {
                    weight: c.weight,
                    state: c.state.rotate(theta),
                })
                .collect(),
        }
    }

    /// Exact first and second moments (law of total variance).
    pub fn moments(&self) -> GaussianState {
        let mean = self
            .components
            .iter()
            .fold(Vec2::zeros(), |acc, c| acc + c.state.mean() * c.weight);
        let cov = self.components.iter().fold(Mat2::zeros(), |acc, c| {
            let dm = c.state.mean() - mean;
            acc + (c.state.cov() + dm * dm.transpose()) * c.weight
        });
        GaussianState::from_parts(mean, cov)
    }
}

/// `ρ_D`: the coherent state `|α⟩` after Gaussian phase diffusion.
pub fn dephase(alpha: f64, noise: PhaseNoise, nodes: usize) -> Result<GaussianMixture> {
    rotated_seeds(alpha, noise, nodes)?.try_map(|s| Ok(s.clone()))
}

/// `ρ_out`: the dephased seed passed through the OPO, component by component.
pub fn dephase_then_opo(
    alpha: f64,
    noise: PhaseNoise,
    opo: &OpoParams,
    nodes: usize,
) -> Result<GaussianMixture> {
    rotated_seeds(alpha, noise, nodes)?.try_map(|s| opo.apply(s))
}

fn rotated_seeds(alpha: f64, noise: PhaseNoise, nodes: usize) -> Result<GaussianMixture> {
    if nodes == 0 || nodes % 2 == 0 {
        return Err(Error::range(
            "phase-noise nodes (must be odd)",
            nodes as f64,
        ));
    }
    if noise.sigma == 0.0 {
        return Ok(GaussianMixture::single(GaussianState::coherent(
            alpha, 0.0,
        )?));
    }
    let rule = gauss_hermite(nodes)?;
    // outer Hermite weights may underflow to zero for large rules
    let total: f64 = rule.weights.iter().sum();
    let scale = std::f64::consts::SQRT_2 * noise.sigma;
    let components = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&t, &w)| {
            Ok(MixtureComponent {
                weight: w / total,
                state: GaussianState::coherent(alpha, scale * t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GaussianMixture::new(components)
}
