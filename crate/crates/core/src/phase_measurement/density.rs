use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::gaussian::{Mat2, Vec2, VACUUM_VARIANCE};
use crate::numerics::{bisect, gauss_legendre, golden_max, QuadratureRule};
use crate::phase_noise::GaussianMixture;

pub const DEFAULT_GRID: usize = 2048;
pub const MIN_GRID: usize = 64;

/// Largest tolerated deviation of the grid mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-5;

/// Components lighter than this do not contribute to the density.
const NEGLIGIBLE_WEIGHT: f64 = 1e-20;
const RADIAL_RTOL: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 14;
const PEAK_SCAN: usize = 128;
const HALF_TOL: f64 = 1e-10;

fn radial_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16).expect("valid order"))
}

struct Term {
    weight: f64,
    mean: Vec2,
    precision: Mat2,
    prefactor: f64,
}

/// Heterodyne phase density `p(φ) = ∫ ζ Q(ζ e^{iφ}) dζ` of a Gaussian mixture.
///
/// The Husimi function of a component with moments `(m, V)` is a Gaussian in
/// `(q, p)` with covariance `W = V + I/2`; the radial integral is done by
/// composite Gauss–Legendre on `[0, ζ_max]`, doubling the panel count until
/// successive estimates agree to `1e-10` relative.
pub struct PhaseDensity {
    terms: Vec<Term>,
    zeta_max: f64,
}

impl PhaseDensity {
    pub fn new(mix: &GaussianMixture) -> Self {
        let mut zeta_max: f64 = 0.0;
        let terms = mix
            .components()
            .iter()
            .filter(|c| c.weight >= NEGLIGIBLE_WEIGHT)
            .map(|c| {
                let w = c.state.cov() + Mat2::identity() * VACUUM_VARIANCE;
                let det = w.determinant();
                let trace = w.trace();
                let lambda_max = 0.5 * (trace + (trace * trace - 4.0 * det).max(0.0).sqrt());
                let reach = (c.state.mean().norm() + 10.0 * lambda_max.sqrt()) / SQRT_2;
                zeta_max = zeta_max.max(reach);
                let precision = Mat2::new(w[(1, 1)], -w[(0, 1)], -w[(1, 0)], w[(0, 0)]) / det;
                Term {
                    weight: c.weight,
                    mean: *c.state.mean(),
                    precision,
                    prefactor: c.weight / (PI * det.sqrt()),
                }
            })
            .collect();
        PhaseDensity { terms, zeta_max }
    }

    fn integrand(&self, zeta: f64, dir: &Vec2) -> f64 {
        let r = dir * (SQRT_2 * zeta);
        self.terms
            .iter()
            .map(|t| {
                let dr = r - t.mean;
                let q = dr.dot(&(t.precision * dr));
                t.prefactor * (-0.5 * q).exp()
            })
            .sum::<f64>()
            * zeta
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let dir = Vec2::new(phi.cos(), phi.sin());
        let rule = radial_rule();
        let mut panels = 4;
        let mut prev =
            rule.integrate_panels(0.0, self.zeta_max, panels, |z| self.integrand(z, &dir));
        loop {
            panels *= 2;
            let next =
                rule.integrate_panels(0.0, self.zeta_max, panels, |z| self.integrand(z, &dir));
            if (next - prev).abs() <= RADIAL_RTOL * next.abs() || panels >= MAX_PANELS {
                return next;
            }
            prev = next;
        }
    }

    /// Total weight of the retained components.
    pub fn retained_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Location of the central peak, searched in `(-π/2, π/2)`.
    pub fn central_peak(&self) -> f64 {
        let step = PI / PEAK_SCAN as f64;
        let (best, _) = (0..PEAK_SCAN)
            .map(|k| -0.5 * PI + step * (k as f64 + 0.5))
            .map(|phi| (phi, self.eval(phi)))
            .fold((0.0, f64::NEG_INFINITY), |acc, (phi, p)| {
                if p > acc.1 {
                    (phi, p)
                } else {
                    acc
                }
            });
        self.refine_peak(best, step)
    }

    fn refine_peak(&self, seed: f64, step: f64) -> f64 {
        let lo = (seed - step).max(-0.5 * PI);
        let hi = (seed + step).min(0.5 * PI);
        golden_max(|phi| self.eval(phi), lo, hi, 1e-9).unwrap_or(seed)
    }

    /// Half width at half maximum of the central peak at `peak`.
    ///
    /// Walks towards `π` in steps of `step` until the density drops to half the
    /// peak value, then bisects on the continuous density. Fails with
    /// [`Error::NoHalfCrossing`] if the density rises again or never halves.
    pub fn hwhm_from(&self, peak: f64, step: f64) -> Result<f64> {
        let half = 0.5 * self.eval(peak);
        let mut prev_phi = peak;
        let mut prev = 2.0 * half;
        let mut phi = peak;
        while phi < PI {
            phi = (phi + step).min(PI);
            let p = self.eval(phi);
            if p <= half {
                let crossing = bisect(|x| self.eval(x) - half, prev_phi, phi, HALF_TOL)?;
                return Ok(crossing - peak);
            }
            if p > prev * (1.0 + 1e-12) {
                return Err(Error::NoHalfCrossing);
            }
            prev_phi = phi;
            prev = p;
        }
        Err(Error::NoHalfCrossing)
    }

    /// Peak search followed by [`PhaseDensity::hwhm_from`].
    pub fn hwhm(&self, step: f64) -> Result<f64> {
        self.hwhm_from(self.central_peak(), step)
    }
}

/// Phase density sampled on a uniform grid over `(-π, π]`.
pub struct PhaseDistribution {
    pub phi_grid: Vec<f64>,
    pub density: Vec<f64>,
    /// `|∫ p dφ - 1|` by the periodic trapezoid rule on the grid.
    pub norm_error: f64,
    pub peak_location: f64,
    /// `None` when the density never falls to half its central maximum.
    pub hwhm: Option<f64>,
    evaluator: PhaseDensity,
}

impl PhaseDistribution {
    pub fn grid_step(&self) -> f64 {
        2.0 * PI / self.phi_grid.len() as f64
    }

    /// The continuous density behind the grid.
    pub fn density_at(&self, phi: f64) -> f64 {
        self.evaluator.eval(phi)
    }

    pub fn evaluator(&self) -> &PhaseDensity {
        &self.evaluator
    }

    /// Grid-local maxima, comparing each point with its periodic neighbours.
    pub fn local_maxima(&self) -> Vec<f64> {
        let n = self.density.len();
        (0..n)
            .filter(|&j| {
                let p = self.density[j];
                p > self.density[(j + n - 1) % n] && p >= self.density[(j + 1) % n]
            })
            .map(|j| self.phi_grid[j])
            .collect()
    }
}

/// `φ_j = -π + 2π (j + 1) / n`, `j = 0..n`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / n as f64;
    (0..n).map(|j| -PI + step * (j + 1) as f64).collect()
}

pub fn phase_density(mix: &GaussianMixture, grid_size: usize) -> Result<PhaseDistribution> {
    if grid_size < MIN_GRID {
        return Err(Error::range("phase grid size", grid_size as f64));
    }
    let evaluator = PhaseDensity::new(mix);
    let phi_grid = phase_grid(grid_size);
    let density: Vec<f64> = phi_grid.iter().map(|&phi| evaluator.eval(phi)).collect();
    let step = 2.0 * PI / grid_size as f64;
    let norm_error = (density.iter().sum::<f64>() * step - 1.0).abs();
    if norm_error > NORMALIZATION_TOL {
        return Err(Error::Normalization(norm_error));
    }

    let central = phi_grid
        .iter()
        .zip(&density)
        .filter(|(phi, _)| phi.abs() < 0.5 * PI)
        .fold((0.0, f64::NEG_INFINITY), |acc, (&phi, &p)| {
            if p > acc.1 {
                (phi, p)
            } else {
                acc
            }
        });
    let peak_location = evaluator.refine_peak(central.0, step);
    let hwhm = evaluator.hwhm_from(peak_location, step).ok();

    Ok(PhaseDistribution {
        phi_grid,
        density,
        norm_error,
        peak_location,
        hwhm,
        evaluator,
    })
}

/// HWHM of the central peak; [`Error::NoHalfCrossing`] for flat densities.
pub fn hwhm(dist: &PhaseDistribution) -> Result<f64> {
    dist.hwhm.ok_or(Error::NoHalfCrossing)
}
