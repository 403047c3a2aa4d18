use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::estimation::{
    dephasing_qfi_bound, energy, fi_homodyne_noiseless, fi_homodyne_noisy, optimized_quadrature,
    qfi_noiseless, relative_fluctuation, HomodyneModel,
};
use crate::mc_oracle::{
    batch_phase_estimates, circular_mean, empirical_fi, phase_histogram, sample_heterodyne_chunked,
    sample_homodyne_chunked, sample_moments, RNG_ALGORITHM,
};
use crate::numerics::{chi2_p_value, chi2_statistic, gauss_legendre, ks_p_value, ks_statistic};
use crate::opo::d_from_squeezing;
use crate::phase_measurement::{
    gamma_dephased, gamma_out, gamma_seed, gamma_squeezed, indirect_variance, phase_density,
    phase_grid, threshold_alpha, threshold_d, threshold_sigma_direct, threshold_sigma_indirect,
    HwhmSettings, IndirectKind, PhaseDensity, Threshold,
};
use crate::phase_noise::{dephase, dephase_then_opo, GaussianMixture, PhaseNoise};
use crate::{Error, Result};

use super::config::RunConfig;

/// Rows of a CSV table; cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn hwhm_or_nan(r: Result<f64>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::NoHalfCrossing) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

fn settings(cfg: &RunConfig) -> HwhmSettings {
    HwhmSettings {
        nodes: cfg.nodes,
        step: 2.0 * PI / cfg.grid as f64,
    }
}

pub fn opo_moments(cfg: &RunConfig) -> Result<Table> {
    let base = cfg.opo_params()?;
    let mut rows = Vec::new();
    for &d in &cfg.sweep.d_values {
        let opo = base.with_d(d)?;
        let m = opo.output_moments(cfg.alpha)?;
        for phi_in in phase_grid(cfg.sweep.phi_points) {
            let a = opo.amplified_mean(cfg.alpha, phi_in);
            rows.push(
                [
                    d,
                    opo.eta_in(),
                    opo.eta_esc(),
                    cfg.alpha,
                    phi_in,
                    m.alpha_q_tilde,
                    m.alpha_p_tilde,
                ]
                .into_iter()
                .chain([
                    m.sigma2_q,
                    m.sigma2_p,
                    a.alpha_out,
                    a.phi_out,
                    opo.squeezing(),
                ])
                .map(fmt)
                .collect(),
            );
        }
    }
    Ok(Table {
        header: vec![
            "d",
            "eta_in",
            "eta_esc",
            "alpha",
            "phi_in",
            "alpha_q_tilde",
            "alpha_p_tilde",
            "sigma2_q",
            "sigma2_p",
            "alpha_out",
            "phi_out",
            "r",
        ],
        rows,
    })
}

pub fn phase_dist(cfg: &RunConfig) -> Result<Table> {
    let opo = cfg.opo_params()?;
    let noise = cfg.noise()?;
    let p0 = phase_density(&dephase(cfg.alpha, PhaseNoise::none(), 1)?, cfg.grid)?;
    let pd = phase_density(&dephase(cfg.alpha, noise, cfg.nodes)?, cfg.grid)?;
    let pout = phase_density(
        &dephase_then_opo(cfg.alpha, noise, &opo, cfg.nodes)?,
        cfg.grid,
    )?;
    let rows = (0..cfg.grid)
        .map(|j| {
            [
                p0.phi_grid[j],
                p0.density[j],
                pd.density[j],
                pout.density[j],
            ]
            .into_iter()
            .map(fmt)
            .collect()
        })
        .collect();
    Ok(Table {
        header: vec!["phi", "p0", "pD", "pout"],
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwhmTable {
    Surface,
    Seed,
}

pub fn hwhm_map(cfg: &RunConfig, table: HwhmTable) -> Result<Table> {
    let opo = cfg.opo_params()?;
    let s = settings(cfg);
    let sw = &cfg.sweep;
    match table {
        HwhmTable::Surface => {
            let points: Vec<(f64, f64)> = sw
                .alpha_values
                .iter()
                .flat_map(|&a| sw.sigma_values.iter().map(move |&s| (a, s)))
                .collect();
            let rows = points
                .par_iter()
                .map(|&(alpha, sigma)| {
                    let noise = PhaseNoise::new(sigma)?;
                    let gd = hwhm_or_nan(gamma_dephased(alpha, noise, &s))?;
                    let go = hwhm_or_nan(gamma_out(alpha, noise, &opo, &s))?;
                    Ok([alpha, sigma, gd, go].into_iter().map(fmt).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table {
                header: vec!["alpha", "sigma", "gamma_D", "gamma_out"],
                rows,
            })
        }
        HwhmTable::Seed => {
            let points: Vec<(f64, f64)> = sw
                .d_values
                .iter()
                .flat_map(|&d| sw.alpha_values.iter().map(move |&a| (a, d)))
                .collect();
            let rows = points
                .par_iter()
                .map(|&(alpha, d)| {
                    let g0 = hwhm_or_nan(gamma_seed(alpha, &s))?;
                    let gs = hwhm_or_nan(gamma_squeezed(alpha, &opo.with_d(d)?, &s))?;
                    Ok([alpha, g0, gs, d].into_iter().map(fmt).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table {
                header: vec!["alpha", "gamma_0", "gamma_S", "d"],
                rows,
            })
        }
    }
}

fn threshold_json(r: Result<Threshold>) -> Value {
    match r {
        Ok(t) => json!({
            "value": t.value,
            "bracket": [t.bracket.0, t.bracket.1],
            "skipped_scan_points": t.skipped,
        }),
        Err(e) => json!({ "value": null, "reason": e.to_string() }),
    }
}

pub fn thresholds(cfg: &RunConfig) -> Result<Value> {
    let opo = cfg.opo_params()?;
    let s = settings(cfg);
    let sw = &cfg.sweep;
    let alpha_th = threshold_alpha(&opo, (sw.alpha_range[0], sw.alpha_range[1]), &s);
    let sigma_direct =
        threshold_sigma_direct(&opo, cfg.alpha, (sw.sigma_range[0], sw.sigma_range[1]), &s);
    let d_th = threshold_d(opo.eta_in(), opo.eta_esc());
    let sigma_indirect = match threshold_sigma_indirect(cfg.alpha, &opo) {
        Ok(v) => json!({ "value": v }),
        Err(e) => json!({ "value": null, "reason": e.to_string() }),
    };
    Ok(json!({
        "alpha_th": threshold_json(alpha_th),
        "sigma_th_direct": threshold_json(sigma_direct),
        "d_th": threshold_json(d_th),
        "sigma_th_indirect": sigma_indirect,
    }))
}

pub fn indirect(cfg: &RunConfig) -> Result<Table> {
    let opo = cfg.opo_params()?;
    let mut rows = Vec::new();
    for &alpha in &cfg.sweep.alpha_values {
        for &sigma in &cfg.sweep.sigma_values {
            let noise = PhaseNoise::new(sigma)?;
            let v = |kind| indirect_variance(kind, alpha, noise).map(|r| r.variance);
            let row = [
                alpha,
                sigma,
                v(IndirectKind::Seed)?,
                v(IndirectKind::Dephased)?,
                v(IndirectKind::Opo(opo))?,
            ];
            rows.push(row.into_iter().map(fmt).collect());
        }
    }
    Ok(Table {
        header: vec!["alpha", "sigma", "var_seed", "var_dephased", "var_opo"],
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherTable {
    Squeezing,
    Angle,
}

pub fn fisher(cfg: &RunConfig, table: FisherTable) -> Result<Table> {
    let opo = cfg.opo_params()?;
    let alpha = cfg.sweep.fisher_alpha;
    match table {
        FisherTable::Squeezing => {
            let rows = cfg
                .sweep
                .r_values
                .iter()
                .map(|&r| {
                    let o = opo.with_d(d_from_squeezing(r))?;
                    let best = optimized_quadrature(&o, alpha, cfg.theta)?;
                    let mut row: Vec<String> = [
                        r,
                        energy(&o, alpha)?,
                        qfi_noiseless(&o, alpha)?,
                        best.fi,
                        best.phi_max,
                    ]
                    .into_iter()
                    .map(fmt)
                    .collect();
                    row.push(best.branch.index().to_string());
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table {
                header: vec!["r", "N", "H_nl", "F_nl", "phi_max", "branch"],
                rows,
            })
        }
        FisherTable::Angle => {
            let n = cfg.sweep.phi_scan_points;
            let rows = (0..n)
                .map(|k| {
                    let phi = PI * k as f64 / n as f64;
                    Ok(vec![
                        fmt(phi),
                        fmt(fi_homodyne_noiseless(&opo, alpha, cfg.theta, phi)?),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table {
                header: vec!["phi", "F"],
                rows,
            })
        }
    }
}

pub fn noisy_fisher(cfg: &RunConfig) -> Result<Table> {
    let opo = cfg.opo_params()?;
    let alpha = cfg.sweep.noisy_alpha;
    let points: Vec<(f64, f64)> = cfg
        .sweep
        .noisy_sigmas
        .iter()
        .flat_map(|&s| cfg.sweep.noisy_d_values.iter().map(move |&d| (s, d)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(sigma, d)| {
            let o = opo.with_d(d)?;
            let best = optimized_quadrature(&o, alpha, cfg.theta)?;
            let n = energy(&o, alpha)?;
            let noise = PhaseNoise::new(sigma)?;
            let probe = dephase_then_opo(alpha, noise, &o, cfg.nodes)?;
            let f_n = fi_homodyne_noisy(&probe, cfg.theta, best.phi_max)?;
            let eps = relative_fluctuation(f_n, best.fi)?;
            let bound = if sigma > 0.0 {
                dephasing_qfi_bound(n, sigma)?
            } else {
                4.0 * n
            };
            Ok([n, sigma, f_n, best.fi, eps, bound]
                .into_iter()
                .map(fmt)
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        header: vec!["N", "sigma", "F_n", "F_nl", "epsilon", "H_UB"],
        rows,
    })
}

/// Tolerances of the Monte-Carlo battery.
pub const MAX_BIN_DEVIATION: f64 = 5e-3;
pub const SIGNIFICANCE: f64 = 0.01;
pub const BATCH_SIZE: usize = 10_000;
pub const BATCHES: usize = 2_000;
pub const BATCH_RTOL: f64 = 0.10;
pub const EMPIRICAL_FI_RTOL: f64 = 0.10;
const CHUNK: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            pass: value < threshold,
        }
    }

    fn above(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            pass: value > threshold,
        }
    }
}

/// Mean of the analytic density over each histogram bin (8-point
/// Gauss–Legendre per bin).
pub fn bin_averaged_density(density: &PhaseDensity, bins: usize) -> Result<Vec<f64>> {
    let rule = gauss_legendre(8)?;
    let w = 2.0 * PI / bins as f64;
    Ok((0..bins)
        .into_par_iter()
        .map(|b| {
            let lo = -PI + w * b as f64;
            rule.integrate_interval(lo, lo + w, |x| density.eval(x)) / w
        })
        .collect())
}

/// Largest deviation between a sampled heterodyne histogram and the analytic
/// phase density, in density units.
pub fn heterodyne_deviation(mix: &GaussianMixture, cfg: &RunConfig) -> Result<f64> {
    let sc = cfg.sample_config()?;
    let phases = sample_heterodyne_chunked(mix, &sc, CHUNK)?;
    let hist = phase_histogram(&phases, &sc)?;
    let exact = bin_averaged_density(&PhaseDensity::new(mix), sc.bins)?;
    Ok(hist
        .density()
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// KS p-value of sampled homodyne outcomes of `x_φ` against the mixture CDF.
pub fn homodyne_ks(mix: &GaussianMixture, theta: f64, phi: f64, cfg: &RunConfig) -> Result<f64> {
    let sc = cfg.sample_config()?;
    let x = sample_homodyne_chunked(mix, theta, phi, &sc, CHUNK)?;
    let model = HomodyneModel::new(mix.clone(), theta, phi);
    let d = ks_statistic(&x, |v| model.cdf(v));
    Ok(ks_p_value(d, x.len()))
}

/// `batch · Var(φ̂) / Δ²φ − 1` for the indirect estimator on the dephased seed.
pub fn batch_estimator_error(cfg: &RunConfig) -> Result<f64> {
    let noise = cfg.noise()?;
    let mix = dephase(cfg.alpha, noise, cfg.nodes)?;
    let est = batch_phase_estimates(&mix, BATCH_SIZE, BATCHES, cfg.seed)?;
    let m = sample_moments(&est);
    let target = indirect_variance(IndirectKind::Dephased, cfg.alpha, noise)?.variance;
    Ok(BATCH_SIZE as f64 * m.var / target - 1.0)
}

pub fn mc_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let opo = cfg.opo_params()?;
    let noise = cfg.noise()?;
    let sc = cfg.sample_config()?;
    let seed_state = dephase(cfg.alpha, PhaseNoise::none(), 1)?;
    let dephased = dephase(cfg.alpha, noise, cfg.nodes)?;
    let out = dephase_then_opo(cfg.alpha, noise, &opo, cfg.nodes)?;
    let mut checks = Vec::new();

    let vacuum = GaussianMixture::single(crate::gaussian::GaussianState::vacuum());
    let hist = phase_histogram(&sample_heterodyne_chunked(&vacuum, &sc, CHUNK)?, &sc)?;
    let observed: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let expected = vec![sc.n_samples as f64 / sc.bins as f64; sc.bins];
    let p = chi2_p_value(chi2_statistic(&observed, &expected), sc.bins - 1);
    checks.push(Check::above("vacuum_heterodyne_chi2_p", p, SIGNIFICANCE));

    let (mean, se) = circular_mean(&sample_heterodyne_chunked(&seed_state, &sc, CHUNK)?);
    checks.push(Check::below(
        "coherent_circular_mean_in_se",
        mean.abs() / se,
        3.0,
    ));

    checks.push(Check::below(
        "dephased_heterodyne_max_bin_dev",
        heterodyne_deviation(&dephased, cfg)?,
        MAX_BIN_DEVIATION,
    ));
    checks.push(Check::below(
        "opo_heterodyne_max_bin_dev",
        heterodyne_deviation(&out, cfg)?,
        MAX_BIN_DEVIATION,
    ));

    let q = sample_moments(&sample_homodyne_chunked(&dephased, 0.0, 0.0, &sc, CHUNK)?);
    let want = indirect_variance(IndirectKind::Dephased, cfg.alpha, noise)?.var_q;
    checks.push(Check::below(
        "dephased_q_variance_in_se",
        (q.var - want).abs() / q.var_se,
        3.0,
    ));

    checks.push(Check::above(
        "dephased_homodyne_ks_p",
        homodyne_ks(&dephased, 0.0, 0.0, cfg)?,
        SIGNIFICANCE,
    ));
    checks.push(Check::above(
        "opo_homodyne_ks_p",
        homodyne_ks(&out, 0.0, FRAC_PI_2, cfg)?,
        SIGNIFICANCE,
    ));

    checks.push(Check::below(
        "batch_estimator_rel_error",
        batch_estimator_error(cfg)?.abs(),
        BATCH_RTOL,
    ));

    let clean = dephase(1.0, PhaseNoise::none(), 1)?;
    let fi = empirical_fi(&clean, 0.0, FRAC_PI_2, 0.02, &sc)?;
    checks.push(Check::below(
        "coherent_empirical_fi_rel_error",
        (fi - 4.0).abs() / 4.0,
        EMPIRICAL_FI_RTOL,
    ));
    Ok(checks)
}

pub fn mc_validate(cfg: &RunConfig) -> Result<Value> {
    let checks = mc_checks(cfg)?;
    let all = checks.iter().all(|c| c.pass);
    Ok(json!({
        "rng": RNG_ALGORITHM,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "value": c.value,
            "threshold": c.threshold,
            "pass": c.pass,
        })).collect::<Vec<_>>(),
        "all_pass": all,
    }))
}
