//! Stochastic oracle: heterodyne and homodyne records sampled from mixtures,
//! used to cross-check the analytic densities, variances and Fisher
//! information.
//!
//! All draws come from ChaCha20 seeded with [`SampleConfig::seed`]. Chunked
//! sampling gives chunk `k` its own ChaCha stream `k`, so chunk 0 reproduces
//! the unchunked record prefix.

use std::f64::consts::PI;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{HomodyneModel, QuadratureMarginal};
use crate::gaussian::{Mat2, Vec2, VACUUM_VARIANCE};
use crate::numerics::Histogram;
use crate::phase_noise::GaussianMixture;

/// Name of the random source, recorded alongside sampled output.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), stream per chunk";
pub const MIN_BINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub bins: usize,
}

impl SampleConfig {
    pub fn new(n_samples: usize, seed: u64, bins: usize) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::range("sample count", 0.0));
        }
        if bins < MIN_BINS {
            return Err(Error::range("histogram bins", bins as f64));
        }
        Ok(SampleConfig {
            n_samples,
            seed,
            bins,
        })
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn picker(mix: &GaussianMixture) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(mix.components().iter().map(|c| c.weight))
        .map_err(|e| Error::InvalidMixture(e.to_string()))
}

/// Lower Cholesky factor of a 2×2 positive-definite matrix.
fn cholesky(m: &Mat2) -> Result<Mat2> {
    m.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))
}

fn husimi_draws(mix: &GaussianMixture, rng: &mut ChaCha20Rng, n: usize) -> Result<Vec<Vec2>> {
    let pick = picker(mix)?;
    let factors = mix
        .components()
        .iter()
        .map(|c| cholesky(&(c.state.cov() + Mat2::identity() * VACUUM_VARIANCE)))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..n)
        .map(|_| {
            let i = pick.sample(rng);
            let z = Vec2::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
            mix.components()[i].state.mean() + factors[i] * z
        })
        .collect())
}

fn heterodyne_draws(mix: &GaussianMixture, rng: &mut ChaCha20Rng, n: usize) -> Result<Vec<f64>> {
    Ok(husimi_draws(mix, rng, n)?
        .iter()
        .map(|r| r[1].atan2(r[0]))
        .collect())
}

fn homodyne_draws(
    mix: &GaussianMixture,
    theta: f64,
    phi: f64,
    rng: &mut ChaCha20Rng,
    n: usize,
) -> Result<Vec<f64>> {
    let pick = picker(mix)?;
    let marginals: Vec<QuadratureMarginal> = mix
        .components()
        .iter()
        .map(|c| QuadratureMarginal::of(&c.state, theta, phi))
        .collect();
    Ok((0..n)
        .map(|_| {
            let m = &marginals[pick.sample(rng)];
            let z: f64 = StandardNormal.sample(rng);
            m.mean + m.var.sqrt() * z
        })
        .collect())
}

/// Heterodyne phases `atan2(p, q)` of points drawn from the Husimi function.
pub fn sample_heterodyne(mix: &GaussianMixture, cfg: &SampleConfig) -> Result<Vec<f64>> {
    heterodyne_draws(mix, &mut rng_for(cfg.seed, 0), cfg.n_samples)
}

/// Phase-space points `(q, p)` drawn from the Husimi function.
pub fn sample_husimi(mix: &GaussianMixture, cfg: &SampleConfig) -> Result<Vec<Vec2>> {
    husimi_draws(mix, &mut rng_for(cfg.seed, 0), cfg.n_samples)
}

/// Homodyne outcomes of `x_φ` on the mixture rotated by `θ`.
pub fn sample_homodyne(
    mix: &GaussianMixture,
    theta: f64,
    phi: f64,
    cfg: &SampleConfig,
) -> Result<Vec<f64>> {
    homodyne_draws(mix, theta, phi, &mut rng_for(cfg.seed, 0), cfg.n_samples)
}

fn chunked<F>(n: usize, chunk: usize, draw: F) -> Result<Vec<f64>>
where
    F: Fn(u64, usize) -> Result<Vec<f64>> + Sync,
{
    if chunk == 0 {
        return Err(Error::range("chunk size", 0.0));
    }
    let chunks = n.div_ceil(chunk);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|k| draw(k as u64, chunk.min(n - k * chunk)))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// [`sample_heterodyne`] split into independently seeded chunks sampled in
/// parallel. The record is deterministic for a given chunk size.
pub fn sample_heterodyne_chunked(
    mix: &GaussianMixture,
    cfg: &SampleConfig,
    chunk: usize,
) -> Result<Vec<f64>> {
    chunked(cfg.n_samples, chunk, |k, n| {
        heterodyne_draws(mix, &mut rng_for(cfg.seed, k), n)
    })
}

/// [`sample_homodyne`] split into independently seeded chunks.
pub fn sample_homodyne_chunked(
    mix: &GaussianMixture,
    theta: f64,
    phi: f64,
    cfg: &SampleConfig,
    chunk: usize,
) -> Result<Vec<f64>> {
    chunked(cfg.n_samples, chunk, |k, n| {
        homodyne_draws(mix, theta, phi, &mut rng_for(cfg.seed, k), n)
    })
}

/// Phase histogram over `[-π, π)` with `cfg.bins` bins.
pub fn phase_histogram(phases: &[f64], cfg: &SampleConfig) -> Result<Histogram> {
    // atan2 may return exactly π, which belongs to the first bin
    let wrapped: Vec<f64> = phases
        .iter()
        .map(|&x| if x >= PI { x - 2.0 * PI } else { x })
        .collect();
    Histogram::from_samples(&wrapped, -PI, PI, cfg.bins)
}

/// Histogram estimate of the homodyne Fisher information at `θ`, from two
/// records at `θ ± h` that share their random draws.
///
/// Low accuracy by construction (binning plus finite differences); good to
/// about ten percent with 10⁶ samples.
pub fn empirical_fi(
    mix: &GaussianMixture,
    theta: f64,
    phi: f64,
    h: f64,
    cfg: &SampleConfig,
) -> Result<f64> {
    if !(1e-3..=1e-1).contains(&h) {
        return Err(Error::range("finite-difference step", h));
    }
    let plus = sample_homodyne(mix, theta + h, phi, cfg)?;
    let minus = sample_homodyne(mix, theta - h, phi, cfg)?;
    let (lo, hi) = HomodyneModel::new(mix.clone(), theta, phi).window();
    let hp = Histogram::from_samples(&plus, lo, hi, cfg.bins)?;
    let hm = Histogram::from_samples(&minus, lo, hi, cfg.bins)?;
    let width = hp.width();
    let fi = hp
        .density()
        .iter()
        .zip(hm.density())
        .filter(|(a, b)| **a + *b > 0.0)
        .map(|(a, b)| {
            let p = 0.5 * (a + b);
            let dp = (a - b) / (2.0 * h);
            dp * dp / p * width
        })
        .sum();
    Ok(fi)
}

/// Writes a raw record as CSV with header `index,<column>`.
pub fn write_record<W: Write>(mut out: W, column: &str, values: &[f64]) -> std::io::Result<()> {
    writeln!(out, "index,{column}")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:?}")?;
    }
    Ok(())
}

/// Mean of `atan2`-type angles through their resultant vector, and its
/// standard error.
pub fn circular_mean(angles: &[f64]) -> (f64, f64) {
    let n = angles.len() as f64;
    let (s, c) = angles
        .iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let mean = s.atan2(c);
    let rbar = (s * s + c * c).sqrt() / n;
    let spread = angles.iter().map(|a| (a - mean).sin().powi(2)).sum::<f64>() / n;
    (mean, (spread / n).sqrt() / rbar)
}

/// Sample mean and variance, and the standard errors of both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    pub var: f64,
    pub mean_se: f64,
    pub var_se: f64,
}

pub fn sample_moments(x: &[f64]) -> SampleMoments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    SampleMoments {
        mean,
        var,
        mean_se: (var / n).sqrt(),
        var_se: ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n)
            .max(0.0)
            .sqrt(),
    }
}

/// Repeated indirect phase estimates `atan2(⟨p⟩, ⟨q⟩)`, each from `batch`
/// q-outcomes and `batch` p-outcomes on fresh copies of the state.
pub fn batch_phase_estimates(
    mix: &GaussianMixture,
    batch: usize,
    batches: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..batches as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k);
            let q = homodyne_draws(mix, 0.0, 0.0, &mut rng, batch)?;
            let p = homodyne_draws(mix, 0.0, 0.5 * PI, &mut rng, batch)?;
            let mq = q.iter().sum::<f64>() / batch as f64;
            let mp = p.iter().sum::<f64>() / batch as f64;
            Ok(mp.atan2(mq))
        })
        .collect()
}
