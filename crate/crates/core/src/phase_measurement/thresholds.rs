//! Threshold searches for the direct (HWHM) and indirect (variance) phase
//! measurements.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::try_bisect;
use crate::opo::{OpoParams, D_MAX};
use crate::phase_noise::{dephase, dephase_then_opo, GaussianMixture, PhaseNoise};

use super::density::{PhaseDensity, DEFAULT_GRID};
use super::indirect::{indirect_variance, IndirectKind};

pub const SCAN_POINTS: usize = 64;
pub const HWHM_TOL: f64 = 1e-4;
pub const D_TOL: f64 = 1e-12;
pub const CROSSING_TOL: f64 = 1e-13;

/// Root of a threshold equation with the bracket it was bisected from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub bracket: (f64, f64),
    /// Scan points where the difference could not be evaluated.
    pub skipped: usize,
}

/// Settings shared by the HWHM-based threshold searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwhmSettings {
    pub nodes: usize,
    /// Walk step of the half-maximum search.
    pub step: f64,
}

impl Default for HwhmSettings {
    fn default() -> Self {
        HwhmSettings {
            nodes: crate::phase_noise::DEFAULT_NODES,
            step: 2.0 * PI / DEFAULT_GRID as f64,
        }
    }
}

fn gamma(mix: &GaussianMixture, step: f64) -> Result<f64> {
    PhaseDensity::new(mix).hwhm(step)
}

/// `Γ₀(α)`: HWHM of the coherent seed.
pub fn gamma_seed(alpha: f64, s: &HwhmSettings) -> Result<f64> {
    gamma(&dephase(alpha, PhaseNoise::none(), 1)?, s.step)
}

/// `Γ_S(α)`: HWHM of the seed after the OPO.
pub fn gamma_squeezed(alpha: f64, opo: &OpoParams, s: &HwhmSettings) -> Result<f64> {
    gamma(
        &dephase_then_opo(alpha, PhaseNoise::none(), opo, 1)?,
        s.step,
    )
}

/// `Γ_D(α, σ)`: HWHM of the dephased seed.
pub fn gamma_dephased(alpha: f64, noise: PhaseNoise, s: &HwhmSettings) -> Result<f64> {
    gamma(&dephase(alpha, noise, s.nodes)?, s.step)
}

/// `Γ_out(α, σ)`: HWHM of the dephased seed after the OPO.
pub fn gamma_out(alpha: f64, noise: PhaseNoise, opo: &OpoParams, s: &HwhmSettings) -> Result<f64> {
    gamma(&dephase_then_opo(alpha, noise, opo, s.nodes)?, s.step)
}

/// Evaluates `f` on `SCAN_POINTS` uniform points of `[lo, hi]` and bisects the
/// first sign change. Points where `f` fails are skipped.
fn scan_and_bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Threshold>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(lo < hi) {
        return Err(Error::range("threshold search interval", hi - lo));
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let values: Vec<(f64, Option<f64>)> = (0..SCAN_POINTS)
        .into_par_iter()
        .map(|k| {
            let x = if k == SCAN_POINTS - 1 {
                hi
            } else {
                lo + step * k as f64
            };
            (x, f(x).ok().filter(|v| v.is_finite()))
        })
        .collect();
    let skipped = values.iter().filter(|(_, v)| v.is_none()).count();
    let defined: Vec<(f64, f64)> = values
        .into_iter()
        .filter_map(|(x, v)| v.map(|v| (x, v)))
        .collect();
    let bracket = defined
        .windows(2)
        .find(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0))
        .ok_or(Error::NoBracket { lo, hi })?;
    let value = try_bisect(&f, bracket.0, bracket.1, tol)?;
    Ok(Threshold {
        value,
        bracket,
        skipped,
    })
}

/// Seed amplitude where the OPO stops sharpening the noiseless phase
/// distribution: root of `Γ₀(α) − Γ_S(α)`.
pub fn threshold_alpha(
    opo: &OpoParams,
    alpha_range: (f64, f64),
    s: &HwhmSettings,
) -> Result<Threshold> {
    scan_and_bisect(
        |a| Ok(gamma_seed(a, s)? - gamma_squeezed(a, opo, s)?),
        alpha_range.0,
        alpha_range.1,
        HWHM_TOL,
    )
}

/// Phase-noise level above which the OPO output is sharper than the dephased
/// seed: root of `Γ_D(σ) − Γ_out(σ)`.
pub fn threshold_sigma_direct(
    opo: &OpoParams,
    alpha: f64,
    sigma_range: (f64, f64),
    s: &HwhmSettings,
) -> Result<Threshold> {
    scan_and_bisect(
        |sigma| {
            let noise = PhaseNoise::new(sigma)?;
            Ok(gamma_dephased(alpha, noise, s)? - gamma_out(alpha, noise, opo, s)?)
        },
        sigma_range.0,
        sigma_range.1,
        HWHM_TOL,
    )
}

/// `f(d) = 4 η_in η_esc / (1 − d)² [1 + (d / η_in) e^{−2r(d)}] − 1`, written
/// without dividing by `η_in`.
pub fn threshold_d_residual(eta_in: f64, eta_esc: f64, d: f64) -> f64 {
    4.0 * eta_esc * (eta_in / ((1.0 - d) * (1.0 - d)) + d / ((1.0 + d) * (1.0 + d))) - 1.0
}

/// Squeezing above which the OPO output beats the seed's indirect-measurement
/// signal-to-noise ratio.
pub fn threshold_d(eta_in: f64, eta_esc: f64) -> Result<Threshold> {
    OpoParams::new(0.0, eta_in, eta_esc)?;
    scan_and_bisect(
        |d| Ok(threshold_d_residual(eta_in, eta_esc, d)),
        0.0,
        D_MAX,
        D_TOL,
    )
}

/// Closed-form crossing of the dephased and OPO indirect variances.
pub fn threshold_sigma_indirect(alpha: f64, opo: &OpoParams) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::range("coherent amplitude", alpha));
    }
    let m = opo.output_moments(alpha)?;
    let (aq2, ap2) = (m.alpha_q_tilde.powi(2), m.alpha_p_tilde.powi(2));
    let a2 = alpha * alpha;
    let num = 2.0 * a2 * (aq2 - ap2);
    let den = aq2 + 2.0 * a2 * (aq2 - ap2 - m.sigma2_p);
    if !(den > 0.0) || !(num / den > 1.0) {
        return Err(Error::NoThreshold);
    }
    Ok((0.5 * (num / den).ln()).sqrt())
}

/// Numerical crossing of the two indirect variances, bisected to
/// [`CROSSING_TOL`] on `[0, sigma_max]`.
pub fn indirect_crossing(alpha: f64, opo: &OpoParams, sigma_max: f64) -> Result<f64> {
    let diff = |sigma: f64| -> Result<f64> {
        let noise = PhaseNoise::new(sigma)?;
        Ok(
            indirect_variance(IndirectKind::Dephased, alpha, noise)?.variance
                - indirect_variance(IndirectKind::Opo(*opo), alpha, noise)?.variance,
        )
    };
    let t = scan_and_bisect(diff, 0.0, sigma_max, CROSSING_TOL)?;
    Ok(t.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn reference() -> OpoParams {
        OpoParams::realistic(0.4).unwrap()
    }

    #[test]
    fn indirect_sigma_threshold_reference() {
        let s = threshold_sigma_indirect(2.0, &reference()).unwrap();
        assert!((s - 0.337_503_1).abs() < 1e-7, "{s}");
        assert!((s * s - 0.113_908_4).abs() < 1e-7);
    }

    #[test]
    fn crossing_equals_closed_form() {
        let opo = reference();
        for alpha in [1.0, 2.0, 3.0] {
            let closed = threshold_sigma_indirect(alpha, &opo).unwrap();
            let numeric = indirect_crossing(alpha, &opo, 1.5).unwrap();
            assert!((closed - numeric).abs() < 1e-10, "alpha = {alpha}");
        }
    }

    #[test]
    fn variances_cross_at_threshold() {
        let opo = reference();
        let s = threshold_sigma_indirect(2.0, &opo).unwrap();
        let var = |kind, sigma| {
            indirect_variance(kind, 2.0, PhaseNoise::new(sigma).unwrap())
                .unwrap()
                .variance
        };
        let gap = var(IndirectKind::Dephased, s) - var(IndirectKind::Opo(opo), s);
        assert!(gap.abs() < 1e-10);
        assert!(var(IndirectKind::Opo(opo), s + 0.05) < var(IndirectKind::Dephased, s + 0.05));
        assert!(var(IndirectKind::Opo(opo), s - 0.05) > var(IndirectKind::Dephased, s - 0.05));
    }

    #[test]
    fn no_threshold_without_squeezing_benefit() {
        // at d = 0 the OPO only attenuates the seed
        let opo = OpoParams::realistic(0.0).unwrap();
        assert_eq!(threshold_sigma_indirect(2.0, &opo), Err(Error::NoThreshold));
    }

    #[test]
    fn d_threshold() {
        let (ei, ee) = (0.01, 0.93);
        assert!(threshold_d_residual(ei, ee, 0.0) < 0.0);
        assert!((threshold_d_residual(ei, ee, 0.0) - (4.0 * ei * ee - 1.0)).abs() < 1e-15);
        let t = threshold_d(ei, ee).unwrap();
        assert!(threshold_d_residual(ei, ee, t.value).abs() < 1e-9);
        assert!((t.value - 0.53).abs() < 0.01, "{}", t.value);
        // above the root the OPO output has the better signal-to-noise ratio
        for d in [t.value - 0.05, t.value + 0.05] {
            let m = OpoParams::realistic(d)
                .unwrap()
                .output_moments(1.0)
                .unwrap();
            let better = m.sigma2_p / m.alpha_q_tilde.powi(2) < 0.5;
            assert_eq!(better, d > t.value);
        }
    }

    #[test]
    fn d_threshold_residual_matches_textbook_form() {
        let (ei, ee) = (0.02_f64, 0.9);
        for d in [0.1, 0.5, 0.9] {
            let r = crate::opo::squeezing_from_d(d);
            let textbook =
                4.0 * ei * ee / ((1.0 - d) * (1.0 - d)) * (1.0 + d / ei * (-2.0 * r).exp()) - 1.0;
            assert!((threshold_d_residual(ei, ee, d) - textbook).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_d_threshold() {
        // without seed coupling f(d) = 4 η_esc d / (1 + d)² − 1 < η_esc − 1
        assert!(matches!(
            threshold_d(0.0, 0.5),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn alpha_threshold_brackets_sign_change() {
        let s = HwhmSettings::default();
        let opo = reference();
        let t = threshold_alpha(&opo, (0.1, 5.0), &s).unwrap();
        let below = gamma_squeezed(t.value - 0.1, &opo, &s).unwrap()
            - gamma_seed(t.value - 0.1, &s).unwrap();
        let above = gamma_squeezed(t.value + 0.1, &opo, &s).unwrap()
            - gamma_seed(t.value + 0.1, &s).unwrap();
        assert!(below < 0.0 && above > 0.0, "{below} {above}");
        assert!(t.bracket.0 <= t.value && t.value <= t.bracket.1);
    }

    #[test]
    fn dephased_width_grows_with_noise() {
        let s = HwhmSettings {
            nodes: 101,
            ..HwhmSettings::default()
        };
        let widths: Vec<f64> = [0.0, 0.2, 0.4, FRAC_PI_4]
            .iter()
            .map(|&sigma| gamma_dephased(2.0, PhaseNoise::new(sigma).unwrap(), &s).unwrap())
            .collect();
        assert!(widths.windows(2).all(|w| w[1] >= w[0]), "{widths:?}");
    }
}
