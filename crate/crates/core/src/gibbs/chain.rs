use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EdgeMask, GibbsError, GibbsState, Result, SamplerConfig};
use crate::model::{
    pairs, Adjacency, ConnectionMatrices, ContinuousParams, ModelParams, NetworkShape,
    TruncationBounds,
};
use crate::polya_gamma::cap_anomalies;
use crate::spectral::{multilayer_init_from_mean, LayerDiagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Subsampling,
    Standard,
}

/// One kept sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Zero-based index in the combined schedule.
    pub sweep: usize,
    pub phase: Phase,
    pub a: ConnectionMatrices,
    pub theta: ContinuousParams,
    /// `log P(X_K^(n) | A, Theta, X_{K-1}^(n))` per sample; standard phase only.
    pub loglik: Option<Vec<f64>>,
    /// Values at the masked positions, in mask order.
    pub imputed: Option<Vec<u8>>,
    /// Latent layers `0..K` per sample, when requested.
    pub latents: Option<Vec<Vec<Adjacency>>>,
}

#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub shape: NetworkShape,
    pub records: Vec<TraceRecord>,
    pub mask: Vec<(usize, usize, usize)>,
    pub initial_a: ConnectionMatrices,
    pub init_diagnostics: Vec<LayerDiagnostics>,
    pub sweeps: usize,
    /// Polya-Gamma iteration-cap events during the run.
    pub pg_anomalies: u64,
}

impl ChainTrace {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Rows of `loglik`, one per standard-phase record.
    pub fn loglik_rows(&self) -> Vec<Vec<f64>> {
        self.records.iter().filter_map(|r| r.loglik.clone()).collect()
    }

    pub fn phase_records(&self, phase: Phase) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.phase == phase)
    }
}

/// Entrywise mean of the observed matrices over unmasked positions.
fn masked_mean(data: &[Adjacency], mask: &EdgeMask) -> DMatrix<f64> {
    let p = data[0].size();
    let mut sum = DMatrix::zeros(p, p);
    let mut count = DMatrix::from_element(p, p, data.len() as f64);
    for x in data {
        for i in 0..p {
            for j in 0..p {
                sum[(i, j)] += x.get(i, j) as f64;
            }
        }
    }
    for &(n, i, j) in mask.entries() {
        let v = data[n].get(i, j) as f64;
        sum[(i, j)] -= v;
        sum[(j, i)] -= v;
        count[(i, j)] -= 1.0;
        count[(j, i)] -= 1.0;
    }
    let observed_total: f64 = sum.sum();
    let observed_count: f64 = count.sum();
    let fallback = if observed_count > 0.0 {
        observed_total / observed_count
    } else {
        0.0
    };
    DMatrix::from_fn(p, p, |i, j| {
        if count[(i, j)] > 0.0 {
            sum[(i, j)] / count[(i, j)]
        } else {
            fallback
        }
    })
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Starting continuous parameters from observed edge rates: the intercept from pairs
/// with disjoint memberships, the `Gamma` diagonal from pairs sharing a community,
/// off-diagonal `Gamma` at half the diagonal. Every layer starts from the same values.
fn initial_theta(
    data: &[Adjacency],
    mask: &EdgeMask,
    a: &ConnectionMatrices,
    bounds: Option<TruncationBounds>,
) -> ContinuousParams {
    let shape = a.shape();
    let a_k = a.layer(shape.depth());
    let p = shape.observed_width();
    let mut masked = std::collections::HashSet::new();
    for &e in mask.entries() {
        masked.insert(e);
    }
    let (mut shared, mut shared_n, mut apart, mut apart_n) = (0.5, 1.0, 0.5, 1.0);
    for (n, x) in data.iter().enumerate() {
        for (i, j) in pairs(p) {
            if masked.contains(&(n, i, j)) {
                continue;
            }
            let v = x.get(i, j) as f64;
            if a_k.row(i) & a_k.row(j) != 0 {
                shared += v;
                shared_n += 1.0;
            } else {
                apart += v;
                apart_n += 1.0;
            }
        }
    }
    let mut c = logit(apart / apart_n);
    let mut diag = (logit(shared / shared_n) - c).max(0.5);
    let mut off = 0.5 * diag;
    if let Some(b) = bounds {
        c = c.clamp(b.c.0, b.c.1);
        diag = diag.clamp(b.gamma_diag.0.max(f64::MIN_POSITIVE), b.gamma_diag.1);
        off = off.clamp(b.gamma_off.0.max(f64::MIN_POSITIVE), b.gamma_off.1);
    }
    let mut theta = ContinuousParams::homogeneous(&shape, c, off, diag);
    theta.bounds = bounds;
    theta
}

/// Runs the two-phase schedule: `subsample_sweeps` subsampling sweeps, then
/// `standard_sweeps` standard sweeps. Without `init`, the connection matrices start
/// from the Mixed-SCORE initialization of the (mask-aware) mean adjacency.
pub fn run_chain(
    data: &[Adjacency],
    mask: &EdgeMask,
    shape: &NetworkShape,
    config: &SamplerConfig,
    init: Option<ConnectionMatrices>,
) -> Result<ChainTrace> {
    config.validate()?;
    if data.is_empty() {
        return Err(GibbsError::Data("no observed samples".into()));
    }
    if let Some(x) = data.iter().find(|x| x.size() != shape.observed_width()) {
        return Err(GibbsError::Data(format!(
            "observed matrix is {0}x{0}, shape needs {1}x{1}",
            x.size(),
            shape.observed_width()
        )));
    }
    let (a, diagnostics) = match init {
        Some(a) => {
            if &a.shape() != shape {
                return Err(GibbsError::Init(format!(
                    "initial connection matrices have shape {:?}, expected {:?}",
                    a.shape().widths(),
                    shape.widths()
                )));
            }
            (a, Vec::new())
        }
        None => {
            let res = multilayer_init_from_mean(
                masked_mean(data, mask),
                shape,
                config.sparsity,
                config.seed,
            )
            .map_err(|e| GibbsError::Init(e.to_string()))?;
            (res.a, res.diagnostics)
        }
    };
    let theta = initial_theta(data, mask, &a, config.bounds);
    let params = ModelParams::new(a, theta)?;
    let state = GibbsState::new(data, mask, params, config.clone())?;
    let mut trace = run_chain_from(state)?;
    trace.init_diagnostics = diagnostics;
    Ok(trace)
}

/// Continues from an existing state with the schedule in its configuration.
pub fn run_chain_from(mut state: GibbsState) -> Result<ChainTrace> {
    let config = state.config().clone();
    let anomalies_before = cap_anomalies();
    let initial_a = state.params.a.clone();
    let mut records = Vec::new();
    let total = config.total_sweeps();
    for t in 0..total {
        let phase = if t < config.subsample_sweeps {
            state.sweep_subsampling()?;
            Phase::Subsampling
        } else {
            state.sweep_standard()?;
            Phase::Standard
        };
        if t < config.burn_in || (t - config.burn_in) % config.thin != 0 {
            continue;
        }
        let depth = state.shape().depth();
        let loglik = (phase == Phase::Standard).then(|| {
            (0..state.sample_count())
                .map(|n| state.observed_loglik(n))
                .collect::<Vec<_>>()
        });
        if let Some(bad) = loglik
            .as_ref()
            .and_then(|l| l.iter().position(|v| !v.is_finite()))
        {
            return Err(GibbsError::NumericalAbort {
                sweep: t,
                what: format!("log-likelihood of sample {bad}"),
            });
        }
        let imputed = (!state.mask_entries().is_empty()).then(|| state.imputed_values());
        let latents = config.record_latents.then(|| {
            state
                .samples
                .iter()
                .map(|s| s.layers[..depth].to_vec())
                .collect()
        });
        records.push(TraceRecord {
            sweep: t,
            phase,
            a: state.params.a.clone(),
            theta: state.params.theta.clone(),
            loglik,
            imputed,
            latents,
        });
    }
    Ok(ChainTrace {
        shape: state.shape(),
        records,
        mask: state.mask_entries().to_vec(),
        initial_a,
        init_diagnostics: Vec::new(),
        sweeps: total,
        pg_anomalies: cap_anomalies() - anomalies_before,
    })
}
