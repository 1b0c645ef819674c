//! Layered latent-space generative model for multiplex networks.
//!
//! A sample of networks on a shared node set is explained by a stack of
//! increasingly coarse latent networks. The crate covers simulation, data
//! augmented Gibbs inference (standard, subsampled and masked), Mixed-SCORE
//! initialization, identifiability checks on connection matrices, and the
//! post-processing used for model selection and prediction.

pub mod analysis;
pub mod assign;
pub mod gibbs;
pub mod identifiability;
pub mod model;
pub mod polya_gamma;
pub mod presets;
pub mod rng;
pub mod simulate;
pub mod spectral;
pub mod truncnorm;

pub use gibbs::{run_chain, ChainTrace, EdgeMask, GibbsError, GibbsState, SamplerConfig};
pub use model::{
    Adjacency, BinaryMatrix, CanonicalIndex, ConnectionMatrices, ContinuousParams, LayeredSample,
    ModelError, ModelParams, NetworkShape, SymMatrix, TruncationBounds,
};
