use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

const FRAC_PI_16: f64 = FRAC_PI_8 / 2.0;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::mc_oracle::{SampleConfig, MIN_BINS};
use crate::numerics::MAX_NODES;
use crate::opo::{OpoParams, REALISTIC_ETA_ESC, REALISTIC_ETA_IN};
use crate::phase_measurement::MIN_GRID;
use crate::phase_noise::PhaseNoise;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpoConfig {
    pub d: f64,
    pub eta_in: f64,
    pub eta_esc: f64,
}

/// Grids swept by the table-producing commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d_values: Vec<f64>,
    pub phi_points: usize,
    pub alpha_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub alpha_range: [f64; 2],
    pub sigma_range: [f64; 2],
    /// Seed amplitude of the noiseless estimation sweeps.
    pub fisher_alpha: f64,
    pub r_values: Vec<f64>,
    pub phi_scan_points: usize,
    pub noisy_alpha: f64,
    pub noisy_d_values: Vec<f64>,
    pub noisy_sigmas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            d_values: vec![0.0, 0.2, 0.4, 0.6],
            phi_points: 16,
            alpha_values: vec![0.5, 1.0, 2.0, 3.0],
            sigma_values: vec![0.0, 0.1, FRAC_PI_8, FRAC_PI_4],
            alpha_range: [0.1, 5.0],
            sigma_range: [0.0, 1.5],
            fisher_alpha: 1.0,
            r_values: (0..=30).map(|k| k as f64 / 10.0).collect(),
            phi_scan_points: 256,
            noisy_alpha: 0.2,
            noisy_d_values: (0..=6).map(|k| (65 + 5 * k) as f64 / 100.0).collect(),
            noisy_sigmas: vec![FRAC_PI_16, FRAC_PI_8, FRAC_PI_4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub sigma: f64,
    pub theta: f64,
    pub opo: OpoConfig,
    pub nodes: usize,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub bins: usize,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 2.0,
            sigma: FRAC_PI_4,
            theta: 0.0,
            opo: OpoConfig {
                d: 0.4,
                eta_in: REALISTIC_ETA_IN,
                eta_esc: REALISTIC_ETA_ESC,
            },
            nodes: 201,
            grid: 2048,
            samples: 1_000_000,
            seed: 20_240_607,
            bins: 64,
            output_path: None,
            sweep: SweepConfig::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Re-checks every physical and numerical parameter.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let e = |err: crate::Error| invalid(err.to_string());
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!(
                "alpha must be a finite non-negative number, got {}",
                self.alpha
            )));
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta must be finite"));
        }
        PhaseNoise::new(self.sigma).map_err(e)?;
        self.opo_params().map_err(e)?;
        if self.nodes == 0 || self.nodes % 2 == 0 || self.nodes > MAX_NODES {
            return Err(invalid(format!(
                "nodes must be odd and at most {MAX_NODES}, got {}",
                self.nodes
            )));
        }
        if self.grid < MIN_GRID {
            return Err(invalid(format!(
                "grid must be at least {MIN_GRID}, got {}",
                self.grid
            )));
        }
        SampleConfig::new(self.samples, self.seed, self.bins).map_err(e)?;
        let s = &self.sweep;
        for &d in s.d_values.iter().chain(&s.noisy_d_values) {
            self.opo_params().and_then(|o| o.with_d(d)).map_err(e)?;
        }
        for &a in s
            .alpha_values
            .iter()
            .chain([&s.fisher_alpha, &s.noisy_alpha])
        {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(format!(
                    "sweep alpha values must be positive, got {a}"
                )));
            }
        }
        for &sigma in s.sigma_values.iter().chain(&s.noisy_sigmas) {
            PhaseNoise::new(sigma).map_err(e)?;
        }
        for &r in &s.r_values {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(invalid(format!(
                    "squeezing values must be non-negative, got {r}"
                )));
            }
            self.opo_params()
                .and_then(|o| o.with_d(crate::opo::d_from_squeezing(r)))
                .map_err(e)?;
        }
        if !(s.alpha_range[0] > 0.0 && s.alpha_range[0] < s.alpha_range[1]) {
            return Err(invalid(
                "alpha_range must be an increasing pair of positive numbers",
            ));
        }
        if !(s.sigma_range[0] >= 0.0 && s.sigma_range[0] < s.sigma_range[1]) {
            return Err(invalid(
                "sigma_range must be an increasing pair of non-negative numbers",
            ));
        }
        PhaseNoise::new(s.sigma_range[1]).map_err(e)?;
        if s.phi_points == 0 || s.phi_scan_points == 0 {
            return Err(invalid("angle sweeps need at least one point"));
        }
        if self.bins < MIN_BINS {
            return Err(invalid("bins too small"));
        }
        Ok(())
    }

    pub fn opo_params(&self) -> crate::Result<OpoParams> {
        OpoParams::new(self.opo.d, self.opo.eta_in, self.opo.eta_esc)
    }

    pub fn noise(&self) -> crate::Result<PhaseNoise> {
        PhaseNoise::new(self.sigma)
    }

    pub fn sample_config(&self) -> crate::Result<SampleConfig> {
        SampleConfig::new(self.samples, self.seed, self.bins)
    }

    /// SHA-256 of the canonical JSON serialisation, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIPPED: &str = include_str!("../../configs/default.json");

    #[test]
    fn shipped_default_matches_builtin() {
        let cfg = RunConfig::from_json(SHIPPED).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.hash(), RunConfig::default().hash());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(SHIPPED).unwrap();
        v["colour"] = serde_json::json!("blue");
        assert!(matches!(
            RunConfig::from_json(&v.to_string()),
            Err(ConfigError::Parse(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(SHIPPED).unwrap();
        v["opo"]["gain"] = serde_json::json!(1.0);
        assert!(matches!(
            RunConfig::from_json(&v.to_string()),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn physical_ranges_checked() {
        let bad = |edit: &dyn Fn(&mut RunConfig)| {
            let mut c = RunConfig::default();
            edit(&mut c);
            let text = serde_json::to_string(&c).unwrap();
            matches!(RunConfig::from_json(&text), Err(ConfigError::Invalid(_)))
        };
        assert!(bad(&|c| c.opo.d = 1.0));
        assert!(bad(&|c| c.opo.eta_esc = 0.995));
        assert!(bad(&|c| c.alpha = -1.0));
        assert!(bad(&|c| c.sigma = 7.0));
        assert!(bad(&|c| c.nodes = 200));
        assert!(bad(&|c| c.grid = 10));
        assert!(bad(&|c| c.samples = 0));
        assert!(bad(&|c| c.sweep.noisy_d_values.push(0.9995)));
    }

    #[test]
    fn hash_tracks_content() {
        let mut c = RunConfig::default();
        let h = c.hash();
        assert_eq!(h.len(), 64);
        c.seed += 1;
        assert_ne!(c.hash(), h);
    }
}
