//! Ancestral sampling from the layered model and the hierarchical SBM generator.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;

use crate::model::{
    logistic, logit_masks, pairs, Adjacency, CanonicalIndex, LayeredSample, ModelError,
    ModelParams, Result, SymMatrix,
};
use crate::rng::{substream, Rng};

const SIMULATE_TAG: u64 = 0x5349_4d55;
const HSBM_TAG: u64 = 0x4853_424d;

fn draw_layer(x_prev: &Adjacency, params: &ModelParams, k: usize, rng: &mut Rng) -> Adjacency {
    let a = params.a.layer(k);
    let (c, gamma) = (params.theta.c(k), params.theta.gamma(k));
    let p = a.nrows();
    let mut x = Adjacency::identity(p);
    for (i, j) in pairs(p) {
        let prob = logistic(logit_masks(c, gamma, a.row(i), a.row(j), x_prev));
        if rng.random::<f64>() < prob {
            x.set(i, j, 1);
        }
    }
    x
}

/// Draws `n` independent layered samples; sample `i` uses its own RNG stream.
pub fn simulate(params: &ModelParams, n: usize, seed: u64) -> Result<Vec<LayeredSample>> {
    let shape = params.shape();
    params.theta.validate(&shape)?;
    let top = WeightedIndex::new(&params.theta.nu)
        .map_err(|e| ModelError::InvalidParameter(format!("nu: {e}")))?;
    let p0 = shape.width(0);
    Ok((0..n)
        .into_par_iter()
        .map(|idx| {
            let mut rng = substream(seed, SIMULATE_TAG, 0, idx as u64);
            let mut layers = vec![CanonicalIndex::decode(top.sample(&mut rng), p0)];
            for k in 1..=shape.depth() {
                let next = draw_layer(&layers[k - 1], params, k, &mut rng);
                layers.push(next);
            }
            LayeredSample { layers }
        })
        .collect())
}

/// Nested community tree: `level_sizes[l]` communities at depth `l`, the last entry
/// being the number of nodes. Consecutive blocks of equal size nest, e.g. `[3, 9, 27]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsbmTree {
    level_sizes: Vec<usize>,
}

impl HsbmTree {
    pub fn new(level_sizes: Vec<usize>) -> Result<Self> {
        if level_sizes.len() < 2 {
            return Err(ModelError::InvalidShape(
                "tree needs at least one community level and the node level".into(),
            ));
        }
        if level_sizes[0] == 0 {
            return Err(ModelError::InvalidShape("empty top level".into()));
        }
        for w in level_sizes.windows(2) {
            if w[1] < w[0] || w[1] % w[0] != 0 {
                return Err(ModelError::InvalidShape(format!(
                    "level of size {} cannot nest in a level of size {}",
                    w[1], w[0]
                )));
            }
        }
        Ok(Self { level_sizes })
    }

    pub fn nodes(&self) -> usize {
        *self.level_sizes.last().unwrap()
    }

    /// Community levels, coarsest first (the node level excluded).
    pub fn levels(&self) -> usize {
        self.level_sizes.len() - 1
    }

    /// Community of `node` at community level `level` (0 = coarsest).
    pub fn label(&self, level: usize, node: usize) -> usize {
        node / (self.nodes() / self.level_sizes[level])
    }

    /// Number of community levels two distinct nodes share.
    pub fn shared_depth(&self, u: usize, v: usize) -> usize {
        (0..self.levels())
            .take_while(|&l| self.label(l, u) == self.label(l, v))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct HsbmData {
    pub observed: Vec<Adjacency>,
    /// Edge probabilities, drawn once and shared by all samples.
    pub probs: SymMatrix,
    /// `labels[l][v]`: community of node `v` at level `l`, coarsest first.
    pub labels: Vec<Vec<usize>>,
}

/// `prob_ranges[d]` is the uniform range for node pairs sharing `d` community levels.
pub fn generate_hsbm(
    tree: &HsbmTree,
    prob_ranges: &[(f64, f64)],
    n: usize,
    seed: u64,
) -> Result<HsbmData> {
    if prob_ranges.len() != tree.levels() + 1 {
        return Err(ModelError::InvalidParameter(format!(
            "need {} probability ranges, got {}",
            tree.levels() + 1,
            prob_ranges.len()
        )));
    }
    if let Some(r) = prob_ranges
        .iter()
        .find(|(lo, hi)| !(0.0 <= *lo && lo <= hi && *hi <= 1.0))
    {
        return Err(ModelError::InvalidParameter(format!(
            "bad probability range {r:?}"
        )));
    }
    let p = tree.nodes();
    let mut rng = substream(seed, HSBM_TAG, 0, 0);
    let mut probs = SymMatrix::filled(p, 0.0, 1.0);
    for (u, v) in pairs(p) {
        let (lo, hi) = prob_ranges[tree.shared_depth(u, v)];
        probs.set(u, v, lo + (hi - lo) * rng.random::<f64>());
    }
    let observed = (0..n)
        .map(|idx| {
            let mut rng = substream(seed, HSBM_TAG, 1, idx as u64);
            let mut x = Adjacency::identity(p);
            for (u, v) in pairs(p) {
                if rng.random::<f64>() < probs.get(u, v) {
                    x.set(u, v, 1);
                }
            }
            x
        })
        .collect();
    let labels = (0..tree.levels())
        .map(|l| (0..p).map(|v| tree.label(l, v)).collect())
        .collect();
    Ok(HsbmData {
        observed,
        probs,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        marginal_loglik_obs, BinaryMatrix, ConnectionMatrices, ContinuousParams, NetworkShape,
    };

    fn small_params(c: f64) -> ModelParams {
        let shape = NetworkShape::new(vec![2, 4]).unwrap();
        let a = ConnectionMatrices::new(
            &shape,
            vec![BinaryMatrix::from_strings(&["10", "01", "11", "10"]).unwrap()],
        )
        .unwrap();
        let mut theta = ContinuousParams::homogeneous(&shape, c, 1.0, 2.5);
        theta.nu = vec![0.35, 0.65];
        ModelParams::new(a, theta).unwrap()
    }

    #[test]
    fn point_mass_nu_fixes_top_layer() {
        let mut params = small_params(-1.0);
        params.theta.nu = vec![0.0, 1.0];
        for s in simulate(&params, 50, 3).unwrap() {
            assert_eq!(s.layers[0], Adjacency::complete(2));
        }
    }

    #[test]
    fn saturated_intercept_gives_complete_graphs() {
        let params = small_params(50.0);
        let draws = simulate(&params, 10_000, 1).unwrap();
        assert!(draws.iter().all(|s| s.observed() == &Adjacency::complete(4)));
    }

    #[test]
    fn deterministic_given_seed() {
        let params = small_params(-0.3);
        assert_eq!(simulate(&params, 20, 9).unwrap(), simulate(&params, 20, 9).unwrap());
        assert_ne!(simulate(&params, 20, 9).unwrap(), simulate(&params, 20, 10).unwrap());
    }

    #[test]
    fn observed_frequencies_match_exact_marginal() {
        let params = small_params(-0.4);
        let n = 100_000;
        let draws = simulate(&params, n, 77).unwrap();
        let mut counts = vec![0usize; CanonicalIndex::cardinality(4)];
        for s in &draws {
            counts[CanonicalIndex::encode(s.observed())] += 1;
        }
        for (code, &count) in counts.iter().enumerate() {
            let p = marginal_loglik_obs(&CanonicalIndex::decode(code, 4), &params)
                .unwrap()
                .exp();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let freq = count as f64 / n as f64;
            assert!((freq - p).abs() <= 4.0 * se + 1e-12, "code {code}: {freq} vs {p}");
        }
    }

    #[test]
    fn hsbm_probability_ranges_and_labels() {
        let tree = HsbmTree::new(vec![3, 9, 27]).unwrap();
        let ranges = [(0.0, 0.1), (0.4, 0.5), (0.7, 0.8)];
        let data = generate_hsbm(&tree, &ranges, 5, 4).unwrap();
        assert_eq!(data.labels[0][26], 2);
        assert_eq!(data.labels[1][26], 8);
        for (u, v) in pairs(27) {
            let (lo, hi) = ranges[tree.shared_depth(u, v)];
            let p = data.probs.get(u, v);
            assert!(p >= lo && p <= hi);
        }
        // nodes 0 and 1 share a leaf, 0 and 26 share nothing
        assert_eq!(tree.shared_depth(0, 1), 2);
        assert_eq!(tree.shared_depth(0, 3), 1);
        assert_eq!(tree.shared_depth(0, 26), 0);
    }

    #[test]
    fn hsbm_edge_frequency_matches_drawn_probability() {
        let tree = HsbmTree::new(vec![1, 2]).unwrap();
        let n = 10_000;
        let data = generate_hsbm(&tree, &[(0.0, 0.1), (0.7, 0.8)], n, 12).unwrap();
        let p = data.probs.get(0, 1);
        let freq = data.observed.iter().filter(|x| x.get(0, 1) == 1).count() as f64 / n as f64;
        assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn malformed_trees_are_rejected() {
        assert!(HsbmTree::new(vec![3, 8]).is_err());
        assert!(HsbmTree::new(vec![4, 2]).is_err());
        assert!(HsbmTree::new(vec![3]).is_err());
        let tree = HsbmTree::new(vec![3, 9]).unwrap();
        assert!(generate_hsbm(&tree, &[(0.0, 0.1)], 1, 0).is_err());
        assert!(generate_hsbm(&tree, &[(0.2, 0.1), (0.5, 0.6)], 1, 0).is_err());
    }
}
