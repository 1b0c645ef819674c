//! Label-switching correction against a reference state.
//!
//! Each latent layer is relabeled by the column permutation of the connection matrix
//! above it that is closest in Hamming distance to the reference. Layers are
//! processed from the observed side down, so each layer's rows already carry the
//! labels chosen for the layer above. This is a greedy approximation to full
//! decision-theoretic relabeling.

use crate::assign::min_cost_assignment;
use crate::gibbs::{ChainTrace, TraceRecord};
use crate::model::{BinaryMatrix, CanonicalIndex, ConnectionMatrices};

/// Permutation applied to every latent layer `0..K` of one record.
pub type LayerPermutations = Vec<Vec<usize>>;

/// Bias toward keeping the current label when costs tie.
const TIE_BIAS: f64 = 1e-6;

fn column_matching(current: &BinaryMatrix, reference: &BinaryMatrix) -> Vec<usize> {
    let d = current.ncols();
    let cols: Vec<Vec<u8>> = (0..d).map(|c| current.column(c)).collect();
    let ref_cols: Vec<Vec<u8>> = (0..d).map(|c| reference.column(c)).collect();
    let mut cost = vec![0.0; d * d];
    for s in 0..d {
        for t in 0..d {
            let h = cols[s].iter().zip(&ref_cols[t]).filter(|(a, b)| a != b).count();
            cost[s * d + t] = h as f64 - if s == t { TIE_BIAS } else { 0.0 };
        }
    }
    min_cost_assignment(&cost, d, d).0
}

fn apply(record: &mut TraceRecord, k: usize, perm: &[usize]) {
    let shape = record.a.shape();
    let mut layers = record.a.layers().to_vec();
    // layer k nodes are the columns of A_{k+1} and the rows of A_k
    layers[k] = layers[k].permute_columns(perm);
    if k >= 1 {
        layers[k - 1] = layers[k - 1].permute_rows(perm);
    }
    record.a = ConnectionMatrices::new(&shape, layers).expect("permutation keeps the shape");
    record.theta.gamma[k] = record.theta.gamma[k].permuted(perm);
    if k == 0 {
        let p0 = shape.width(0);
        let mut nu = vec![0.0; record.theta.nu.len()];
        for (code, &v) in record.theta.nu.iter().enumerate() {
            let x = CanonicalIndex::decode(code, p0).permuted(perm);
            nu[CanonicalIndex::encode(&x)] = v;
        }
        record.theta.nu = nu;
    }
    if let Some(latents) = record.latents.as_mut() {
        for sample in latents.iter_mut() {
            sample[k] = sample[k].permuted(perm);
        }
    }
}

fn relabel_record(record: &mut TraceRecord, reference: &ConnectionMatrices) -> LayerPermutations {
    let depth = reference.depth();
    let mut perms = vec![Vec::new(); depth];
    for k in (0..depth).rev() {
        let perm = column_matching(record.a.layer(k + 1), reference.layer(k + 1));
        apply(record, k, &perm);
        perms[k] = perm;
    }
    perms
}

/// Aligns a single set of connection matrices to `reference` by the same rule.
pub fn align(a: &ConnectionMatrices, reference: &ConnectionMatrices) -> (ConnectionMatrices, LayerPermutations) {
    let shape = a.shape();
    let mut layers = a.layers().to_vec();
    let mut perms = vec![Vec::new(); layers.len()];
    for k in (0..layers.len()).rev() {
        let perm = column_matching(&layers[k], reference.layer(k + 1));
        layers[k] = layers[k].permute_columns(&perm);
        if k >= 1 {
            layers[k - 1] = layers[k - 1].permute_rows(&perm);
        }
        perms[k] = perm;
    }
    let aligned = ConnectionMatrices::new(&shape, layers).expect("permutation keeps the shape");
    (aligned, perms)
}

/// Relabels every record against `reference`; returns the permutations used.
pub fn relabel_against(
    trace: &ChainTrace,
    reference: &ConnectionMatrices,
) -> (ChainTrace, Vec<LayerPermutations>) {
    let mut out = trace.clone();
    let perms = out
        .records
        .iter_mut()
        .map(|r| relabel_record(r, reference))
        .collect();
    (out, perms)
}

/// Relabels against the first kept record.
pub fn relabel(trace: &ChainTrace) -> ChainTrace {
    match trace.records.first() {
        Some(first) => relabel_against(trace, &first.a.clone()).0,
        None => trace.clone(),
    }
}
