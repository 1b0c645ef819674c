//! Ground-truth parameter sets for the bundled simulation designs.

use crate::model::{
    BinaryMatrix, ConnectionMatrices, ContinuousParams, ModelParams, NetworkShape, Result,
};
use crate::simulate::HsbmTree;

/// Intercept shared by every layer of the simulation designs.
pub const SIM_INTERCEPT: f64 = -7.0;
/// Off-diagonal entries of every `Gamma_k`.
pub const SIM_GAMMA_OFF: f64 = 4.0;
/// Diagonal entries of every `Gamma_k` (`4 + 6`).
pub const SIM_GAMMA_DIAG: f64 = 10.0;

/// Uniform `nu`, `C_k = -7`, `Gamma_k = 4 * 11^T + 6 I`.
pub fn sim_theta(shape: &NetworkShape) -> ContinuousParams {
    ContinuousParams::homogeneous(shape, SIM_INTERCEPT, SIM_GAMMA_OFF, SIM_GAMMA_DIAG)
}

/// Shape `(3, 6, 16)`: each `A_k` stacks an identity block, a second block whose
/// columns form an `M_d` member that is not the identity, and a few extra rows with
/// one or two memberships. The result is generically but not strictly identifiable.
pub fn sim_small_truth() -> ModelParams {
    let shape = NetworkShape::new(vec![3, 6, 16]).unwrap();
    let a1 = BinaryMatrix::from_strings(&["100", "010", "001", "100", "110", "001"]).unwrap();
    let a2 = BinaryMatrix::from_strings(&[
        "100000", "010000", "001000", "000100", "000010", "000001", // identity block
        "100000", "110000", "011000", "001100", "000110", "000011", // banded block
        "100001", "010100", "001010", "000001",
    ])
    .unwrap();
    let a = ConnectionMatrices::new(&shape, vec![a1, a2]).unwrap();
    ModelParams::new(a, sim_theta(&shape)).unwrap()
}

/// Row patterns cycled through by [`large_p_truth`]: pure rows, then every pair.
fn cycling_rows(p0: usize) -> Vec<u64> {
    let mut rows: Vec<u64> = (0..p0).map(|i| 1 << i).collect();
    for i in 0..p0 {
        for j in i + 1..p0 {
            rows.push((1 << i) | (1 << j));
        }
    }
    rows
}

/// Two-layer design with `p_0` latent and `p_1` observed nodes; row `r` of `A_1` is
/// pattern `r mod (p_0 + p_0(p_0-1)/2)` of the pure-then-pairs cycle, so any leading
/// submatrix of nodes is again a valid design.
pub fn large_p_truth(p0: usize, p1: usize) -> Result<ModelParams> {
    let shape = NetworkShape::new(vec![p0, p1])?;
    let cycle = cycling_rows(p0);
    let rows = (0..p1).map(|r| cycle[r % cycle.len()]).collect();
    let a = ConnectionMatrices::new(&shape, vec![BinaryMatrix::from_rows(p0, rows)?])?;
    ModelParams::new(a, sim_theta(&shape))
}

/// The 27-node three-level tree `3 -> 9 -> 27`.
pub fn hsbm27_tree() -> HsbmTree {
    HsbmTree::new(vec![3, 9, 27]).unwrap()
}

/// Edge-probability ranges by shared depth: none, coarse only, same leaf.
pub const HSBM27_RANGES: [(f64, f64); 3] = [(0.0, 0.1), (0.4, 0.5), (0.7, 0.8)];
