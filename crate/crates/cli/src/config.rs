use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use mplex::gibbs::{FixedBlocks, Priors};
use mplex::{SamplerConfig, TruncationBounds};

use crate::formats::read_json;
use crate::CliError;

/// Every key any command reads. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Ground-truth file; `fit` starts `A` from it when `init_from_truth` is set.
    pub truth: Option<PathBuf>,
    /// Matrix file for `identify`.
    pub matrix: Option<PathBuf>,
    pub output: Option<PathBuf>,

    /// `sim-small`, `hsbm27` or `large-p`.
    pub preset: Option<String>,
    pub samples: Option<usize>,
    /// `p_1` for the `large-p` preset.
    pub width: Option<usize>,
    /// Fraction of observed entries `simulate` writes to a held-out mask.
    pub holdout: Option<f64>,

    pub shape: Option<Vec<usize>>,
    /// Candidate latent widths `[p_0, .., p_{K-1}]` for `select`.
    pub grid: Option<Vec<Vec<usize>>>,
    pub chains: usize,
    pub init_from_truth: bool,
    pub node_cap: u64,

    pub seed: Option<u64>,
    pub priors: Priors,
    pub sparsity: usize,
    pub bounds: Option<TruncationBounds>,
    pub batch_size: Option<usize>,
    pub subsample_sweeps: usize,
    pub standard_sweeps: usize,
    pub thin: usize,
    pub burn_in: usize,
    pub refresh_all_omegas: bool,
    pub record_latents: bool,
    pub fixed: FixedBlocks,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SamplerConfig::new(0);
        Self {
            data: None,
            mask: None,
            trace: None,
            truth: None,
            matrix: None,
            output: None,
            preset: None,
            samples: None,
            width: None,
            holdout: None,
            shape: None,
            grid: None,
            chains: 1,
            init_from_truth: false,
            node_cap: mplex::identifiability::DEFAULT_NODE_CAP,
            seed: None,
            priors: s.priors,
            sparsity: s.sparsity,
            bounds: s.bounds,
            batch_size: s.batch_size,
            subsample_sweeps: s.subsample_sweeps,
            standard_sweeps: 100,
            thin: s.thin,
            burn_in: s.burn_in,
            refresh_all_omegas: s.refresh_all_omegas,
            record_latents: s.record_latents,
            fixed: s.fixed,
        }
    }
}

/// Parses `key=value`; the value is read as JSON when it parses, else as a string.
fn parse_assignment(text: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected key=value, got {text:?}")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

impl RunConfig {
    /// The optional config file, then `overrides` in order.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut map: Map<String, Value> = match file {
            Some(path) => read_json(path)?,
            None => Map::new(),
        };
        for text in overrides {
            let (key, value) = parse_assignment(text)?;
            map.insert(key, value);
        }
        serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage("config needs a seed".into()))
    }

    pub fn require_path<'a>(&self, value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("config needs `{key}`")))
    }

    pub fn output_dir(&self) -> Result<&Path, CliError> {
        self.require_path(&self.output, "output")
    }

    pub fn sampler(&self) -> Result<SamplerConfig, CliError> {
        let cfg = SamplerConfig {
            priors: self.priors,
            sparsity: self.sparsity,
            bounds: self.bounds,
            batch_size: self.batch_size,
            subsample_sweeps: self.subsample_sweeps,
            standard_sweeps: self.standard_sweeps,
            thin: self.thin,
            burn_in: self.burn_in,
            seed: self.require_seed()?,
            refresh_all_omegas: self.refresh_all_omegas,
            record_latents: self.record_latents,
            fixed: self.fixed,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if self.chains == 0 {
            return Err(CliError::Usage("chains must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_unknown_keys() {
        let cfg = RunConfig::load(None, &["seed=4".into(), "output=out/dir".into(), "shape=[3,6,16]".into()]).unwrap();
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.output.as_deref(), Some(Path::new("out/dir")));
        assert_eq!(cfg.shape, Some(vec![3, 6, 16]));
        assert!(RunConfig::load(None, &["bogus=1".into()]).is_err());
        assert!(RunConfig::load(None, &["seed".into()]).is_err());
        assert!(RunConfig::load(None, &["priors={\"var_c\":2,\"x\":1}".into()]).is_err());
    }

    #[test]
    fn resolved_config_reparses() {
        let cfg = RunConfig::load(None, &["seed=9".into(), "batch_size=15".into()]).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.sampler().unwrap().batch_size, Some(15));
    }

    #[test]
    fn sampler_needs_seed() {
        assert!(RunConfig::default().sampler().is_err());
        let mut cfg = RunConfig::default();
        cfg.seed = Some(1);
        cfg.thin = 0;
        assert!(cfg.sampler().is_err());
    }
}
