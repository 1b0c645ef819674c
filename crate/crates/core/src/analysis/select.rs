use rayon::prelude::*;
use serde::Serialize;

use super::{waic, LoglikMatrix, Waic};
use crate::gibbs::{run_chain, EdgeMask, SamplerConfig};
use crate::model::{Adjacency, NetworkShape};

/// Outcome of one grid cell; `error` is set when the fit or WAIC failed.
#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub widths: Vec<usize>,
    pub waic: Option<Waic>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub cells: Vec<GridCell>,
    /// Index into `cells` of the smallest WAIC.
    pub best: Option<usize>,
}

impl Selection {
    pub fn best_cell(&self) -> Option<&GridCell> {
        self.best.map(|i| &self.cells[i])
    }
}

/// True when every layer is at least twice as wide as the one above it.
pub fn is_feasible(widths: &[usize]) -> bool {
    widths.len() >= 2 && widths[0] >= 2 && widths.windows(2).all(|w| w[1] >= 2 * w[0])
}

/// Full shapes built from candidate latent widths and the observed width, keeping the
/// feasible ones in input order.
pub fn feasible_grid(latent: &[Vec<usize>], observed_width: usize) -> Vec<NetworkShape> {
    latent
        .iter()
        .filter_map(|l| {
            let mut widths = l.clone();
            widths.push(observed_width);
            if is_feasible(&widths) {
                NetworkShape::new(widths).ok()
            } else {
                None
            }
        })
        .collect()
}

/// Fits every shape with the same schedule and scores it by WAIC over the
/// standard-phase log-likelihoods. Cells run in parallel; failures are kept per cell.
pub fn select_model(
    data: &[Adjacency],
    mask: &EdgeMask,
    shapes: &[NetworkShape],
    config: &SamplerConfig,
) -> Selection {
    let cells: Vec<GridCell> = shapes
        .par_iter()
        .map(|shape| {
            let outcome = run_chain(data, mask, shape, config, None)
                .map_err(|e| e.to_string())
                .and_then(|trace| {
                    LoglikMatrix::new(trace.loglik_rows())
                        .map(|l| waic(&l))
                        .map_err(|e| e.to_string())
                });
            let (waic, error) = match outcome {
                Ok(w) => (Some(w), None),
                Err(e) => (None, Some(e)),
            };
            GridCell {
                widths: shape.widths().to_vec(),
                waic,
                error,
            }
        })
        .collect();
    let best = cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.waic.map(|w| (i, w.waic)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    Selection { cells, best }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::sim_small_truth;
    use crate::simulate::simulate;

    #[test]
    fn grid_filters_infeasible_shapes() {
        let latent = vec![vec![2, 4], vec![3, 5], vec![3, 8], vec![4, 8], vec![2, 9]];
        let grid = feasible_grid(&latent, 16);
        let widths: Vec<_> = grid.iter().map(|s| s.widths().to_vec()).collect();
        assert_eq!(widths, vec![vec![2, 4, 16], vec![3, 8, 16], vec![4, 8, 16]]);
        assert!(feasible_grid(&[vec![3, 5]], 16).is_empty());
        assert!(!is_feasible(&[1, 2]));
    }

    #[test]
    fn single_cell_and_failures() {
        let truth = sim_small_truth();
        let data: Vec<Adjacency> = simulate(&truth, 12, 3)
            .unwrap()
            .into_iter()
            .map(|s| s.observed().clone())
            .collect();
        let mut cfg = SamplerConfig::new(1);
        cfg.standard_sweeps = 3;
        let shapes = vec![truth.shape(), NetworkShape::new(vec![2, 4, 10]).unwrap()];
        let sel = select_model(&data, &EdgeMask::empty(), &shapes, &cfg);
        assert_eq!(sel.cells.len(), 2);
        assert!(sel.cells[0].waic.unwrap().waic.is_finite());
        assert!(sel.cells[1].error.is_some());
        assert_eq!(sel.best, Some(0));
    }
}
