//! Post-sampling analysis: WAIC, convergence diagnostics, relabeling, posterior
//! summaries, individual clustering, missing-edge prediction, community metrics and
//! WAIC model selection over a grid of shapes.

mod diagnostics;
mod metrics;
mod predict;
mod relabel;
mod select;
mod summary;
mod waic;

use thiserror::Error;

pub use diagnostics::{gelman_rubin, geweke, Diagnostic};
pub use metrics::{community_metrics, nmi, CommunityMetrics};
pub use predict::{auc, predict_missing};
pub use relabel::{align, relabel, relabel_against, LayerPermutations};
pub use select::{feasible_grid, is_feasible, select_model, GridCell, Selection};
pub use summary::{
    active_entries, cluster_individuals, parameter_traces, posterior_summaries, quantile,
    ClusterAssignment, ParamSummary, PosteriorSummary, ACTIVE_WINDOW,
};
pub use waic::{waic, LoglikMatrix, Waic};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("empty input: {0}")]
    Empty(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("trace too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite log-likelihood at draw {t}, sample {n}")]
    NonFinite { t: usize, n: usize },
    #[error("mask does not match the one used for the trace")]
    MaskMismatch,
}

pub type Result<T> = std::result::Result<T, AnalysisError>;
