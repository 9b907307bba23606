//! Config records, one per command.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use subgeo::drift::{SetSpec, VRecord};
use subgeo::empirical::RateSpec;
use subgeo::interpolation::PairConfig;
use subgeo::models::{ContinuousFixture, ModelSpec};
use subgeo::rate::PhiConfig;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 0;

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(CliError::config)
}

fn one() -> f64 {
    1.0
}

fn default_n_max() -> usize {
    100
}

/// `rate`: a modulus and the range `0..=n_max`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub family: String,
    #[serde(default = "one")]
    pub c: f64,
    pub alpha: Option<f64>,
    pub v0: Option<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

impl RateConfig {
    pub fn phi(&self) -> PhiConfig {
        PhiConfig {
            family: self.family.clone(),
            c: self.c,
            alpha: self.alpha,
            v0: self.v0,
        }
    }
}

/// Multiplies `V` at one state.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub state: usize,
    pub factor: f64,
}

/// Either an explicit `{phi, v, c, b}`, a BRT construction from `gamma`,
/// or continuous-model constants.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    pub gamma: Option<f64>,
    pub fixture: Option<ContinuousFixture<f64>>,
    pub phi: Option<PhiConfig>,
    pub v: Option<VRecord>,
    pub c: Option<SetSpec<usize, f64>>,
    pub b: Option<f64>,
    pub b_scale: Option<f64>,
    pub perturb_v: Option<Perturbation>,
}

fn default_k_max() -> u64 {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    /// Drift-sequence check for `k ≤ k_max`.
    #[serde(default)]
    pub sequence: bool,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    /// Sequence check only at states below this.
    pub guard: Option<usize>,
    /// Return-time moment bounds.
    #[serde(default)]
    pub moments: bool,
    pub pair: Option<PairConfig>,
    /// Monte-Carlo replicas for the cross-check of the rate moment.
    pub mc_replicas: Option<usize>,
    #[serde(default)]
    pub mc_state: usize,
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            sequence: false,
            k_max: default_k_max(),
            guard: None,
            moments: false,
            pair: None,
            mc_replicas: None,
            mc_state: 0,
        }
    }
}

/// `verify`: a model or a kernel file, a certificate and optional checks.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub model: Option<ModelSpec<f64>>,
    pub kernel: Option<PathBuf>,
    #[serde(default)]
    pub certificate: CertificateSection,
    #[serde(default)]
    pub checks: ChecksSection,
    pub seed: Option<u64>,
}

/// `tv`: a finite model, start state, weight and optional rate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvConfig {
    pub model: Option<ModelSpec<f64>>,
    pub kernel: Option<PathBuf>,
    #[serde(default)]
    pub x0: usize,
    pub n_max: usize,
    /// Tabulated `f ≥ 1`; `f ≡ 1` when absent.
    pub f: Option<Vec<f64>>,
    pub rate: Option<RateSpec<f64>>,
}

/// `tradeoff`: a modulus and a list of pairs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffConfig {
    pub phi: PhiConfig,
    #[serde(default)]
    pub pairs: Vec<PairConfig>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_brt_parses() {
        let cfg: VerifyConfig = parse(
            r#"
            [model]
            model = "brt"
            regime = { kind = "polynomial", theta = 2 }
            truncation = 2000
            [certificate]
            gamma = 0.5
            [checks]
            sequence = true
            "#,
        )
        .unwrap();
        assert!(matches!(cfg.model, Some(ModelSpec::Brt(_))));
        assert_eq!(cfg.checks.k_max, 50);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(parse::<RateConfig>("family = \"power\"\nbogus = 1").is_err());
    }
}
