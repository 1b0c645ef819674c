//! Data-augmented Gibbs sampling: standard, subsampled and masked-data sweeps.

mod chain;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, TruncationBounds};

pub use chain::{run_chain, run_chain_from, ChainTrace, Phase, TraceRecord};
pub use state::{candidate_rows, GibbsState};

/// Largest number of candidate rows a single `A_k` row update may enumerate.
pub const MAX_CANDIDATES: usize = 100_000;

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0} candidate rows exceed the enumeration cap of {MAX_CANDIDATES}")]
    TooManyCandidates(usize),
    #[error("top layer has {0} nodes; the categorical update supports at most 4")]
    TopLayerTooWide(usize),
    #[error("non-finite value in {what} after sweep {sweep}")]
    NumericalAbort { sweep: usize, what: String },
    #[error("initialization failed: {0}")]
    Init(String),
}

pub type Result<T> = std::result::Result<T, GibbsError>;

/// Prior hyperparameters (defaults are the weakly informative standard normals): `C_k ~ N(mu_c, var_c)`, diagonal `Gamma` entries
/// `~ N+(mu_gamma_diag, var_gamma_diag)`, off-diagonal `~ N+(mu_gamma_off, var_gamma_off)`,
/// `nu ~ Dirichlet(alpha 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Priors {
    pub mu_c: f64,
    pub var_c: f64,
    pub mu_gamma_diag: f64,
    pub var_gamma_diag: f64,
    pub mu_gamma_off: f64,
    pub var_gamma_off: f64,
    pub alpha: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            mu_c: 0.0,
            var_c: 1.0,
            mu_gamma_diag: 0.0,
            var_gamma_diag: 1.0,
            mu_gamma_off: 0.0,
            var_gamma_off: 1.0,
            alpha: 1.0,
        }
    }
}

/// Blocks held at their initial values. Used by exact-posterior checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedBlocks {
    pub a: bool,
    pub c: bool,
    pub gamma: bool,
    pub nu: bool,
}

fn default_sparsity() -> usize {
    2
}

fn default_thin() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(default)]
    pub priors: Priors,
    /// Maximum number of memberships per row of every `A_k`.
    #[serde(default = "default_sparsity")]
    pub sparsity: usize,
    #[serde(default)]
    pub bounds: Option<TruncationBounds>,
    /// Subsample size `|B|` for the subsampling phase; `None` uses every sample.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub subsample_sweeps: usize,
    #[serde(default)]
    pub standard_sweeps: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Sweeps discarded from the start of the combined schedule.
    #[serde(default)]
    pub burn_in: usize,
    pub seed: u64,
    /// Refresh every `omega` during subsampling sweeps, not only the batch's.
    #[serde(default = "default_true")]
    pub refresh_all_omegas: bool,
    /// Store the latent layers of every kept sweep.
    #[serde(default)]
    pub record_latents: bool,
    #[serde(default)]
    pub fixed: FixedBlocks,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            priors: Priors::default(),
            sparsity: default_sparsity(),
            bounds: None,
            batch_size: None,
            subsample_sweeps: 0,
            standard_sweeps: 0,
            thin: 1,
            burn_in: 0,
            seed,
            refresh_all_omegas: true,
            record_latents: false,
            fixed: FixedBlocks::default(),
        }
    }

    pub fn total_sweeps(&self) -> usize {
        self.subsample_sweeps + self.standard_sweeps
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.priors;
        for (name, v) in [
            ("var_c", p.var_c),
            ("var_gamma_diag", p.var_gamma_diag),
            ("var_gamma_off", p.var_gamma_off),
            ("alpha", p.alpha),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GibbsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("mu_c", p.mu_c),
            ("mu_gamma_diag", p.mu_gamma_diag),
            ("mu_gamma_off", p.mu_gamma_off),
        ] {
            if !v.is_finite() {
                return Err(GibbsError::Config(format!("{name} must be finite")));
            }
        }
        if self.sparsity == 0 {
            return Err(GibbsError::Config("sparsity must be at least 1".into()));
        }
        if self.thin == 0 {
            return Err(GibbsError::Config("thin must be at least 1".into()));
        }
        if self.batch_size == Some(0) {
            return Err(GibbsError::Config("batch_size must be at least 1".into()));
        }
        if let Some(b) = &self.bounds {
            b.validate()?;
        }
        Ok(())
    }
}

/// Observed-layer positions `(n, i, j)`, `i < j`, treated as missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMask {
    entries: Vec<(usize, usize, usize)>,
}

impl EdgeMask {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts and deduplicates; `p` is the observed-layer width.
    pub fn new(p: usize, mut entries: Vec<(usize, usize, usize)>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|&&(_, i, j)| !(i < j && j < p)) {
            return Err(GibbsError::Data(format!(
                "mask entry {e:?} needs i < j < {p}"
            )));
        }
        entries.sort_unstable();
        entries.dedup();
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
