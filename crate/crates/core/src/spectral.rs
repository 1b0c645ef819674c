//! Mixed-SCORE membership estimation and the layer-by-layer initialization of the
//! connection matrices built on it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use serde::Serialize;
use thiserror::Error;

use crate::assign::min_cost_assignment;
use crate::model::{Adjacency, BinaryMatrix, ConnectionMatrices, NetworkShape};
use crate::rng::{substream, Rng};

const SPECTRAL_TAG: u64 = 0x5350_4543;
const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITERS: usize = 200;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("requested {q} eigenpairs of a {dim}x{dim} matrix")]
    TooManyPairs { q: usize, dim: usize },
    #[error("leading eigenvector has a near-zero entry at node {0}; ratios are undefined")]
    DegenerateRatio(usize),
    #[error("simplex vertices are affinely dependent")]
    DegenerateVertices,
    #[error("layer {layer}: {source}")]
    Layer {
        layer: usize,
        #[source]
        source: Box<SpectralError>,
    },
    #[error("no samples to average")]
    NoData,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Leading eigenpairs, largest eigenvalue first.
#[derive(Debug, Clone)]
pub struct EigenPack {
    pub values: Vec<f64>,
    /// `dim x q`, orthonormal columns.
    pub vectors: DMatrix<f64>,
}

/// The `q` algebraically largest eigenpairs of a symmetric matrix. Each eigenvector's
/// first coordinate with magnitude above `1e-12` is made positive.
pub fn topk_symeig(m: &DMatrix<f64>, q: usize) -> Result<EigenPack> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(SpectralError::NotSymmetric);
    }
    if q > dim {
        return Err(SpectralError::TooManyPairs { q, dim });
    }
    let scale = m.amax().max(1.0);
    for i in 0..dim {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(SpectralError::NotSymmetric);
            }
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut vectors = DMatrix::zeros(dim, q);
    let mut values = Vec::with_capacity(q);
    for (col, &idx) in order.iter().take(q).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(col, &v);
        values.push(eig.eigenvalues[idx]);
    }
    Ok(EigenPack { values, vectors })
}

/// Mixed-membership estimate of a degree-corrected block model.
#[derive(Debug, Clone)]
pub struct DcmmEstimate {
    /// `p x q` row-stochastic membership matrix.
    pub pi: DMatrix<f64>,
    pub eigen: EigenPack,
    /// `(q-1) x q`: vertex `k` of the ratio simplex in column `k`.
    pub vertices: DMatrix<f64>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding; returns the best centers over restarts.
fn kmeans(points: &[Vec<f64>], centers: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let dim = points[0].len();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let mut cs: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].clone()];
        while cs.len() < centers {
            let d2: Vec<f64> = points
                .iter()
                .map(|p| cs.iter().map(|c| squared_distance(p, c)).fold(f64::INFINITY, f64::min))
                .collect();
            let total: f64 = d2.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (idx, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = idx;
                    break;
                }
                u -= w;
            }
            cs.push(points[pick].clone());
        }
        let mut labels = vec![usize::MAX; n];
        for _ in 0..KMEANS_MAX_ITERS {
            let mut changed = false;
            for (p, label) in points.iter().zip(labels.iter_mut()) {
                let (arg, _) = cs.iter().enumerate().fold((0, f64::INFINITY), |acc, (c, center)| {
                    let d = squared_distance(p, center);
                    if d < acc.1 {
                        (c, d)
                    } else {
                        acc
                    }
                });
                if *label != arg {
                    *label = arg;
                    changed = true;
                }
            }
            let mut sums = vec![vec![0.0; dim]; cs.len()];
            let mut counts = vec![0usize; cs.len()];
            for (p, &l) in points.iter().zip(&labels) {
                counts[l] += 1;
                sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
            }
            for ((c, s), &cnt) in cs.iter_mut().zip(sums).zip(&counts) {
                if cnt > 0 {
                    *c = s.into_iter().map(|v| v / cnt as f64).collect();
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = points
            .iter()
            .zip(&labels)
            .map(|(p, &l)| squared_distance(p, &cs[l]))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, cs));
        }
    }
    best.unwrap().1
}

/// Successive projection on the rows `(1, x)`: indices of `q` extreme points.
fn successive_projection(points: &[Vec<f64>], q: usize) -> Vec<usize> {
    let mut residual: Vec<DVector<f64>> = points
        .iter()
        .map(|p| DVector::from_iterator(p.len() + 1, std::iter::once(1.0).chain(p.iter().copied())))
        .collect();
    let mut picked = Vec::with_capacity(q);
    for _ in 0..q {
        let (arg, _) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !picked.contains(i))
            .fold((usize::MAX, -1.0), |acc, (i, r)| {
                let nrm = r.norm_squared();
                if nrm > acc.1 {
                    (i, nrm)
                } else {
                    acc
                }
            });
        picked.push(arg);
        let nrm = residual[arg].norm();
        if nrm <= 0.0 {
            continue;
        }
        let u = &residual[arg] / nrm;
        for r in residual.iter_mut() {
            let proj = r.dot(&u);
            *r -= &u * proj;
        }
    }
    picked
}

/// Mixed-SCORE on a symmetric nonnegative matrix with `q` communities.
///
/// Steps: leading `q` eigenvectors, entrywise ratios against the first, vertex hunting
/// (k-means with `min(p, 5q)` centers, then successive projection), barycentric
/// coordinates against the vertices, degree correction, clipping at zero and
/// renormalization.
pub fn mixed_score(y: &DMatrix<f64>, q: usize, seed: u64) -> Result<DcmmEstimate> {
    let p = y.nrows();
    if q == 0 {
        return Err(SpectralError::Invalid("q must be at least 1".into()));
    }
    let eigen = topk_symeig(y, q)?;
    if q == 1 {
        return Ok(DcmmEstimate {
            pi: DMatrix::from_element(p, 1, 1.0),
            eigen,
            vertices: DMatrix::zeros(0, 1),
        });
    }
    let xi1 = eigen.vectors.column(0);
    let threshold = 1e-10 * xi1.norm();
    if let Some(i) = xi1.iter().position(|v| v.abs() < threshold) {
        return Err(SpectralError::DegenerateRatio(i));
    }
    let ratios: Vec<Vec<f64>> = (0..p)
        .map(|i| (1..q).map(|c| eigen.vectors[(i, c)] / xi1[i]).collect())
        .collect();

    let mut distinct = ratios.clone();
    distinct.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    distinct.dedup_by(|a, b| squared_distance(a, b) < 1e-24);
    let centers_wanted = p.min(5 * q).min(distinct.len());
    let mut rng = substream(seed, SPECTRAL_TAG, p as u64, q as u64);
    let centers = if centers_wanted == distinct.len() {
        distinct
    } else {
        kmeans(&ratios, centers_wanted, &mut rng)
    };
    if centers.len() < q {
        return Err(SpectralError::DegenerateVertices);
    }
    let picked = successive_projection(&centers, q);
    let mut vertices = DMatrix::zeros(q - 1, q);
    for (col, &idx) in picked.iter().enumerate() {
        for r in 0..q - 1 {
            vertices[(r, col)] = centers[idx][r];
        }
    }
    // columns (1, v_k) of the barycentric system
    let mut system = DMatrix::zeros(q, q);
    for col in 0..q {
        system[(0, col)] = 1.0;
        for r in 0..q - 1 {
            system[(r + 1, col)] = vertices[(r, col)];
        }
    }
    let lu = system.lu();
    if !lu.is_invertible() {
        return Err(SpectralError::DegenerateVertices);
    }
    // degree correction b_1(k) = (lambda_1 + v_k^T diag(lambda_2..q) v_k)^(-1/2)
    let b1: Vec<f64> = (0..q)
        .map(|col| {
            let quad: f64 = (0..q - 1)
                .map(|r| eigen.values[r + 1] * vertices[(r, col)].powi(2))
                .sum();
            let inner = eigen.values[0] + quad;
            if inner > 0.0 {
                inner.powf(-0.5)
            } else {
                1.0
            }
        })
        .collect();
    let mut pi = DMatrix::zeros(p, q);
    for (i, r) in ratios.iter().enumerate() {
        let rhs = DVector::from_iterator(q, std::iter::once(1.0).chain(r.iter().copied()));
        let w = lu.solve(&rhs).ok_or(SpectralError::DegenerateVertices)?;
        let mut row: Vec<f64> = (0..q).map(|k| (w[k] / b1[k]).max(0.0)).collect();
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        } else {
            let arg = (0..q).fold(0, |a, k| if w[k] > w[a] { k } else { a });
            row = (0..q).map(|k| (k == arg) as u8 as f64).collect();
        }
        for (k, v) in row.into_iter().enumerate() {
            pi[(i, k)] = v;
        }
    }
    Ok(DcmmEstimate {
        pi,
        eigen,
        vertices,
    })
}

/// Turns memberships into a binary row with between 1 and `s` ones: entries at or
/// above `1/s` are kept; an overfull row keeps its `s` largest (ties to the lowest
/// column). A row with no entry at `1/s` is replaced by the nearest feasible
/// membership vector in squared distance, uniform weights on its `m <= s` largest
/// entries, with ties going to the smaller `m`.
pub fn threshold_row(pi_row: &[f64], s: usize) -> u64 {
    let cut = 1.0 / s as f64 - 1e-12;
    let mut order: Vec<usize> = (0..pi_row.len()).collect();
    order.sort_by(|&a, &b| pi_row[b].total_cmp(&pi_row[a]).then(a.cmp(&b)));
    let kept: Vec<usize> = order.iter().copied().filter(|&c| pi_row[c] >= cut).collect();
    let chosen: &[usize] = if kept.is_empty() {
        // ||pi - 1_A / m||^2 = ||pi||^2 + 1/m - (2/m) sum_A pi, minimized by the top m.
        let mut best = (f64::INFINITY, 1);
        let mut top = 0.0;
        for m in 1..=s.min(order.len()) {
            top += pi_row[order[m - 1]];
            let cost = (1.0 - 2.0 * top) / m as f64;
            if cost < best.0 - 1e-12 {
                best = (cost, m);
            }
        }
        &order[..best.1]
    } else {
        &kept[..kept.len().min(s)]
    };
    chosen.iter().fold(0u64, |m, &c| m | (1 << c))
}

/// Rows whose memberships are closest to each pure membership vector, one distinct
/// row per community. Returns the rows and the total squared distance.
pub fn purest_rows(pi: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let (p, q) = pi.shape();
    let norms: Vec<f64> = (0..p).map(|r| pi.row(r).norm_squared()).collect();
    let mut cost = vec![0.0; q * p];
    for s in 0..q {
        for r in 0..p {
            cost[s * p + r] = norms[r] - 2.0 * pi[(r, s)] + 1.0;
        }
    }
    min_cost_assignment(&cost, q, p)
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerDiagnostics {
    pub layer: usize,
    /// Total squared distance of the selected rows to the pure memberships.
    pub purity_gap: f64,
    pub selected_rows: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct InitResult {
    pub a: ConnectionMatrices,
    /// Deepest layer first.
    pub diagnostics: Vec<LayerDiagnostics>,
}

/// Entrywise mean of the observed matrices (unit diagonal included).
pub fn mean_adjacency(observed: &[Adjacency]) -> Result<DMatrix<f64>> {
    let first = observed.first().ok_or(SpectralError::NoData)?;
    let p = first.size();
    let mut mean = DMatrix::zeros(p, p);
    for x in observed {
        if x.size() != p {
            return Err(SpectralError::Invalid("samples differ in size".into()));
        }
        for i in 0..p {
            for j in 0..p {
                mean[(i, j)] += x.get(i, j) as f64;
            }
        }
    }
    Ok(mean / observed.len() as f64)
}

/// Mixed-SCORE, retried once on `Y + tau 11^T` when the leading eigenvector has a zero
/// entry (disconnected mean graphs), with `tau` a thousandth of the mean entry.
fn score_with_retry(y: &DMatrix<f64>, q: usize, seed: u64) -> Result<DcmmEstimate> {
    match mixed_score(y, q, seed) {
        Err(SpectralError::DegenerateRatio(_)) => {
            let p = y.nrows();
            let tau = 1e-3 * y.sum() / (p * p) as f64;
            mixed_score(&y.add_scalar(tau), q, seed)
        }
        other => other,
    }
}

/// Layer-by-layer Mixed-SCORE initialization of `A_K, ..., A_1`.
pub fn multilayer_init(
    observed: &[Adjacency],
    shape: &NetworkShape,
    sparsity: usize,
    seed: u64,
) -> Result<InitResult> {
    let mean = mean_adjacency(observed)?;
    multilayer_init_from_mean(mean, shape, sparsity, seed)
}

/// As [`multilayer_init`], starting from a precomputed mean adjacency matrix.
pub fn multilayer_init_from_mean(
    mean: DMatrix<f64>,
    shape: &NetworkShape,
    sparsity: usize,
    seed: u64,
) -> Result<InitResult> {
    if mean.nrows() != shape.observed_width() {
        return Err(SpectralError::Invalid(format!(
            "mean matrix is {0}x{0}, shape needs {1}x{1}",
            mean.nrows(),
            shape.observed_width()
        )));
    }
    if sparsity == 0 {
        return Err(SpectralError::Invalid("sparsity must be at least 1".into()));
    }
    let depth = shape.depth();
    let mut layers = vec![None; depth];
    let mut diagnostics = Vec::with_capacity(depth);
    let mut current = mean;
    for k in (1..=depth).rev() {
        let q = shape.width(k - 1);
        let est = score_with_retry(&current, q, seed ^ k as u64).map_err(|e| {
            SpectralError::Layer {
                layer: k,
                source: Box::new(e),
            }
        })?;
        let rows: Vec<u64> = (0..shape.width(k))
            .map(|r| {
                let row: Vec<f64> = est.pi.row(r).iter().copied().collect();
                threshold_row(&row, sparsity)
            })
            .collect();
        layers[k - 1] = Some(
            BinaryMatrix::from_rows(q, rows).map_err(|e| SpectralError::Invalid(e.to_string()))?,
        );
        let (selected, gap) = purest_rows(&est.pi);
        let mut next = DMatrix::identity(q, q);
        for s in 0..q {
            for t in 0..q {
                if s != t {
                    next[(s, t)] = current[(selected[s], selected[t])];
                }
            }
        }
        diagnostics.push(LayerDiagnostics {
            layer: k,
            purity_gap: gap,
            selected_rows: selected,
        });
        current = next;
    }
    let a = ConnectionMatrices::new(shape, layers.into_iter().map(Option::unwrap).collect())
        .map_err(|e| SpectralError::Invalid(e.to_string()))?;
    Ok(InitResult { a, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn identity_eigenpairs() {
        let pack = topk_symeig(&DMatrix::identity(4, 4), 2).unwrap();
        assert_eq!(pack.values, vec![1.0, 1.0]);
        let gram = pack.vectors.transpose() * &pack.vectors;
        assert!((gram - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn rank_one_eigenpair() {
        let u = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let m = &u * u.transpose();
        let pack = topk_symeig(&m, 1).unwrap();
        assert!((pack.values[0] - u.norm_squared()).abs() < 1e-10);
        let v = pack.vectors.column(0);
        assert!((v.dot(&u).abs() - u.norm()).abs() < 1e-10);
        assert!(v[0] > 0.0);
    }

    #[test]
    fn full_spectrum_reconstructs() {
        let mut rng = seeded(2);
        let b = DMatrix::from_fn(12, 12, |_, _| rng.random_range(-1.0..1.0));
        let m = &b + b.transpose();
        let pack = topk_symeig(&m, 12).unwrap();
        let mut rebuilt = DMatrix::zeros(12, 12);
        for (k, &l) in pack.values.iter().enumerate() {
            let v = pack.vectors.column(k);
            rebuilt += l * v * v.transpose();
        }
        assert!((rebuilt - &m).amax() < 1e-8);
        for w in pack.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for k in 0..12 {
            let v = pack.vectors.column(k);
            assert!((&m * v - pack.values[k] * v).norm() <= 1e-8 * m.norm());
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(topk_symeig(&m, 1).unwrap_err(), SpectralError::NotSymmetric);
    }

    /// Noiseless DCMM mean `D Pi P Pi^T D` with three pure nodes and mixed ones.
    fn dcmm(pi: &DMatrix<f64>) -> DMatrix<f64> {
        let p = pi.nrows();
        let block = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.2, 0.3, 1.0, 0.25, 0.2, 0.25, 1.0]);
        let degrees = DMatrix::from_diagonal(&DVector::from_fn(p, |i, _| 0.6 + 0.05 * i as f64));
        &degrees * pi * block * pi.transpose() * &degrees
    }

    fn memberships() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            12,
            3,
            &[
                1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5,
                0.0, 0.5, 0.2, 0.3, 0.5, 0.6, 0.2, 0.2, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4, 0.7, 0.0,
                0.3, 0.0, 0.25, 0.75,
            ],
        )
    }

    fn column_matched_error(est: &DMatrix<f64>, truth: &DMatrix<f64>) -> f64 {
        let q = truth.ncols();
        let mut cost = vec![0.0; q * q];
        for a in 0..q {
            for b in 0..q {
                cost[a * q + b] = (est.column(a) - truth.column(b)).amax();
            }
        }
        let (perm, _) = min_cost_assignment(&cost, q, q);
        (0..q)
            .map(|a| (est.column(a) - truth.column(perm[a])).amax())
            .fold(0.0, f64::max)
    }

    #[test]
    fn exact_dcmm_recovery() {
        let pi = memberships();
        let est = mixed_score(&dcmm(&pi), 3, 1).unwrap();
        assert!(column_matched_error(&est.pi, &pi) < 1e-6);
        for r in 0..12 {
            assert!((est.pi.row(r).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_dcmm_recovery() {
        let pi = memberships();
        let probs = dcmm(&pi);
        let mut rng = seeded(8);
        let draws = 4000;
        let mut mean = DMatrix::zeros(12, 12);
        for _ in 0..draws {
            for i in 0..12 {
                mean[(i, i)] += 1.0;
                for j in i + 1..12 {
                    if rng.random::<f64>() < probs[(i, j)] {
                        mean[(i, j)] += 1.0;
                        mean[(j, i)] += 1.0;
                    }
                }
            }
        }
        mean /= draws as f64;
        // the diagonal of the probability matrix is not 1; compare on the model mean
        for i in 0..12 {
            mean[(i, i)] = probs[(i, i)];
        }
        let est = mixed_score(&mean, 3, 1).unwrap();
        let err = column_matched_error(&est.pi, &pi);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn single_community_is_all_ones() {
        let est = mixed_score(&DMatrix::from_element(4, 4, 0.5), 1, 0).unwrap();
        assert_eq!(est.pi, DMatrix::from_element(4, 1, 1.0));
    }

    #[test]
    fn threshold_repairs() {
        assert_eq!(threshold_row(&[0.4, 0.35, 0.25], 2), 0b011);
        assert_eq!(threshold_row(&[0.45, 0.1, 0.1, 0.1, 0.25], 2), 0b10001);
        assert_eq!(threshold_row(&[0.3, 0.3, 0.4], 1), 0b100);
        assert_eq!(threshold_row(&[0.3, 0.25, 0.25, 0.2], 3), 0b0111);
        assert_eq!(threshold_row(&[0.6, 0.2, 0.2], 3), 0b001);
        assert_eq!(threshold_row(&[0.5, 0.5, 0.0], 2), 0b011);
        assert_eq!(threshold_row(&[1.0 / 3.0; 3], 3), 0b111);
        assert_eq!(threshold_row(&[0.34, 0.33, 0.33], 2), 0b011);
        assert_eq!(threshold_row(&[0.5, 0.5, 0.0], 1), 0b001);
    }

    #[test]
    fn assignment_dominates_greedy() {
        let mut rng = seeded(31);
        for _ in 0..100 {
            let pi = DMatrix::from_fn(10, 3, |_, _| rng.random::<f64>());
            let (_, exact) = purest_rows(&pi);
            // greedy: each column picks its best unused row in turn
            let mut used = vec![false; 10];
            let mut greedy = 0.0;
            for s in 0..3 {
                let (r, c) = (0..10)
                    .filter(|&r| !used[r])
                    .map(|r| (r, pi.row(r).norm_squared() - 2.0 * pi[(r, s)] + 1.0))
                    .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                used[r] = true;
                greedy += c;
            }
            assert!(exact <= greedy + 1e-12);
        }
    }

    #[test]
    fn block_diagonal_samples_recover_single_memberships() {
        // three clean blocks of sizes 2, 3, 3
        let labels = [0, 0, 1, 1, 1, 2, 2, 2];
        let p = labels.len();
        let mut dense = vec![0u8; p * p];
        for i in 0..p {
            for j in 0..p {
                dense[i * p + j] = (labels[i] == labels[j]) as u8;
            }
        }
        let x = Adjacency::from_dense(p, &dense).unwrap();
        let shape = NetworkShape::new(vec![3, p]).unwrap();
        let init = multilayer_init(&[x.clone(), x], &shape, 1, 0).unwrap();
        let a = init.a.layer(1);
        for i in 0..p {
            for j in 0..p {
                assert_eq!(a.row(i) == a.row(j), labels[i] == labels[j]);
            }
            assert_eq!(a.row(i).count_ones(), 1);
        }
    }
}
