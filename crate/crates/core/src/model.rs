//! Domain types and the edge likelihood of the layered multiplex model.
//!
//! A network of `K + 1` layers is described by its widths `p_0 <= p_1 <= ... <= p_K`.
//! Layer `k` nodes belong to communities in layer `k - 1` through the binary
//! connection matrix `A_k` (`p_k x p_{k-1}`), and the adjacency of an individual at
//! layer `k` is drawn edge-wise given its adjacency at layer `k - 1`:
//!
//! ```text
//! logit P(X_k[i,j] = 1) = C_k + a_i^T (Gamma_k * X_{k-1}) a_j
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Log-density of a configuration that has zero probability.
///
/// Enumeration loops keep running when they meet it; `log_sum_exp` treats it as an
/// empty term.
pub const IMPOSSIBLE: f64 = f64::NEG_INFINITY;

/// Largest number of joint latent configurations `marginal_loglik_obs` enumerates.
pub const ENUMERATION_BUDGET: u128 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("logit is NaN")]
    NanLogit,
    #[error(
        "exact enumeration needs {needed} latent configurations (budget {budget}); use MCMC-based estimates instead"
    )]
    BudgetExceeded { needed: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Index of the pair `(i, j)`, `i < j`, in row-major upper-triangular order.
#[inline]
pub fn pair_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < p);
    i * (2 * p - i - 1) / 2 + (j - i - 1)
}

#[inline]
pub fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// All pairs `(i, j)` with `i < j < p`, in the same order as [`pair_index`].
pub fn pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |i| (i + 1..p).map(move |j| (i, j)))
}

/// Layer widths of the Bayesian network, shallowest (observed) layer last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct NetworkShape {
    widths: Vec<usize>,
}

impl NetworkShape {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(ModelError::InvalidShape(
                "need at least two layers (K >= 1)".into(),
            ));
        }
        if widths[0] < 2 {
            return Err(ModelError::InvalidShape("p_0 must be at least 2".into()));
        }
        if let Some(k) = (1..widths.len()).find(|&k| widths[k] < widths[k - 1]) {
            return Err(ModelError::InvalidShape(format!(
                "widths must be non-decreasing, but p_{k} = {} < p_{} = {}",
                widths[k],
                k - 1,
                widths[k - 1]
            )));
        }
        Ok(Self { widths })
    }

    /// Number of generative layers `K`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn width(&self, k: usize) -> usize {
        self.widths[k]
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn observed_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Number of `X_0` configurations, i.e. the length of `nu`.
    pub fn top_configurations(&self) -> usize {
        1usize << pair_count(self.widths[0])
    }
}

impl TryFrom<Vec<usize>> for NetworkShape {
    type Error = ModelError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NetworkShape> for Vec<usize> {
    fn from(s: NetworkShape) -> Self {
        s.widths
    }
}

/// Symmetric binary adjacency matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Adjacency {
    n: usize,
    cells: Vec<u8>,
}

impl Adjacency {
    /// The matrix with no off-diagonal edges.
    pub fn identity(n: usize) -> Self {
        let mut cells = vec![0u8; n * n];
        for i in 0..n {
            cells[i * n + i] = 1;
        }
        Self { n, cells }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            n,
            cells: vec![1u8; n * n],
        }
    }

    /// Builds from the upper-triangular entries in row-major pair order.
    pub fn from_upper(n: usize, upper: &[u8]) -> Result<Self> {
        if upper.len() != pair_count(n) {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} upper-triangular entries for n = {n}, got {}",
                pair_count(n),
                upper.len()
            )));
        }
        let mut adj = Self::identity(n);
        for ((i, j), &b) in pairs(n).zip(upper) {
            if b > 1 {
                return Err(ModelError::InvalidParameter(format!(
                    "adjacency entries must be 0 or 1, got {b}"
                )));
            }
            adj.set(i, j, b);
        }
        Ok(adj)
    }

    /// Builds from a dense row-major matrix, checking symmetry and the unit diagonal.
    pub fn from_dense(n: usize, dense: &[u8]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                n * n,
                dense.len()
            )));
        }
        for i in 0..n {
            if dense[i * n + i] != 1 {
                return Err(ModelError::InvalidParameter(format!(
                    "diagonal entry ({i}, {i}) must be 1"
                )));
            }
            for j in 0..n {
                let v = dense[i * n + j];
                if v > 1 || v != dense[j * n + i] {
                    return Err(ModelError::InvalidParameter(format!(
                        "entry ({i}, {j}) breaks binary symmetry"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            cells: dense.to_vec(),
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.n + j]
    }

    /// Sets entry `(i, j)` and its mirror. Diagonal entries are left at 1.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        if i != j {
            self.cells[i * self.n + j] = v;
            self.cells[j * self.n + i] = v;
        }
    }

    pub fn upper(&self) -> Vec<u8> {
        pairs(self.n).map(|(i, j)| self.get(i, j)).collect()
    }

    pub fn edge_count(&self) -> usize {
        pairs(self.n).filter(|&(i, j)| self.get(i, j) == 1).count()
    }

    /// Relabels nodes: entry `(perm[i], perm[j])` of the result is entry `(i, j)` here.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::identity(self.n);
        for (i, j) in pairs(self.n) {
            out.set(perm[i], perm[j], self.get(i, j));
        }
        out
    }

    /// Principal submatrix on `nodes` (in the given order).
    pub fn submatrix(&self, nodes: &[usize]) -> Self {
        let m = nodes.len();
        let mut out = Self::identity(m);
        for (a, b) in pairs(m) {
            out.set(a, b, self.get(nodes[a], nodes[b]));
        }
        out
    }
}

/// Bijection between adjacency configurations and integer codes.
///
/// The upper-triangular bit vector (row-major pair order) is read as a big-endian
/// binary number, so integer order is the lexicographic order of bit vectors.
pub struct CanonicalIndex;

impl CanonicalIndex {
    pub fn encode(adj: &Adjacency) -> usize {
        let m = pair_count(adj.size());
        debug_assert!(m < usize::BITS as usize);
        pairs(adj.size())
            .enumerate()
            .fold(0usize, |code, (r, (i, j))| {
                code | ((adj.get(i, j) as usize) << (m - 1 - r))
            })
    }

    pub fn decode(code: usize, n: usize) -> Adjacency {
        let m = pair_count(n);
        let mut adj = Adjacency::identity(n);
        for (r, (i, j)) in pairs(n).enumerate() {
            adj.set(i, j, ((code >> (m - 1 - r)) & 1) as u8);
        }
        adj
    }

    pub fn cardinality(n: usize) -> usize {
        1usize << pair_count(n)
    }
}

/// Binary `rows x cols` matrix stored as one bitmask per row (`cols <= 64`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    cols: usize,
    rows: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if cols > 64 {
            return Err(ModelError::InvalidShape(format!(
                "at most 64 columns supported, got {cols}"
            )));
        }
        Ok(Self {
            cols,
            rows: vec![0; rows],
        })
    }

    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self> {
        let mut m = Self::zeros(0, cols)?;
        let limit = if cols == 64 { u64::MAX } else { (1u64 << cols) - 1 };
        if let Some(r) = rows.iter().position(|&r| r & !limit != 0) {
            return Err(ModelError::DimensionMismatch(format!(
                "row {r} has bits beyond column {cols}"
            )));
        }
        m.rows = rows;
        Ok(m)
    }

    /// Parses rows such as `["100", "011"]`; character `c` of a row is column `c`.
    pub fn from_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut masks = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(ModelError::DimensionMismatch(format!(
                    "row {r} has length {} instead of {cols}",
                    row.len()
                )));
            }
            let mut mask = 0u64;
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '1' => mask |= 1 << c,
                    '0' => {}
                    other => {
                        return Err(ModelError::InvalidParameter(format!(
                            "unexpected character {other:?} in binary row"
                        )))
                    }
                }
            }
            masks.push(mask);
        }
        Self::from_rows(cols, masks)
    }

    pub fn from_dense(rows: usize, cols: usize, dense: &[u8]) -> Result<Self> {
        if dense.len() != rows * cols {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                rows * cols,
                dense.len()
            )));
        }
        let masks = (0..rows)
            .map(|r| {
                (0..cols).fold(0u64, |m, c| {
                    if dense[r * cols + c] != 0 {
                        m | (1 << c)
                    } else {
                        m
                    }
                })
            })
            .collect();
        Self::from_rows(cols, masks)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|&m| {
                (0..self.cols)
                    .map(|c| if m >> c & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> u64 {
        self.rows[r]
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    #[inline]
    pub fn set_row(&mut self, r: usize, mask: u64) {
        self.rows[r] = mask;
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        ((self.rows[r] >> c) & 1) as u8
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.nrows()).map(|r| self.get(r, c)).collect()
    }

    /// Reorders columns: column `perm[c]` of the result is column `c` here.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|&m| {
                (0..self.cols).fold(0u64, |acc, c| {
                    if m >> c & 1 == 1 {
                        acc | (1 << perm[c])
                    } else {
                        acc
                    }
                })
            })
            .collect();
        Self {
            cols: self.cols,
            rows,
        }
    }

    /// Reorders rows: row `perm[r]` of the result is row `r` here.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut rows = vec![0; self.rows.len()];
        for (r, &m) in self.rows.iter().enumerate() {
            rows[perm[r]] = m;
        }
        Self {
            cols: self.cols,
            rows,
        }
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}

/// Iterates the set bits of a row mask.
#[inline]
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

/// The connection matrices `A_1 .. A_K`; `layer(k)` is `A_k` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConnectionMatrices {
    layers: Vec<BinaryMatrix>,
}

impl ConnectionMatrices {
    pub fn new(shape: &NetworkShape, layers: Vec<BinaryMatrix>) -> Result<Self> {
        if layers.len() != shape.depth() {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} connection matrices, got {}",
                shape.depth(),
                layers.len()
            )));
        }
        for (idx, a) in layers.iter().enumerate() {
            let k = idx + 1;
            if a.nrows() != shape.width(k) || a.ncols() != shape.width(k - 1) {
                return Err(ModelError::DimensionMismatch(format!(
                    "A_{k} is {}x{} but the shape needs {}x{}",
                    a.nrows(),
                    a.ncols(),
                    shape.width(k),
                    shape.width(k - 1)
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `A_k`, for `k` in `1..=K`.
    #[inline]
    pub fn layer(&self, k: usize) -> &BinaryMatrix {
        &self.layers[k - 1]
    }

    #[inline]
    pub fn layer_mut(&mut self, k: usize) -> &mut BinaryMatrix {
        &mut self.layers[k - 1]
    }

    pub fn layers(&self) -> &[BinaryMatrix] {
        &self.layers
    }

    pub fn shape(&self) -> NetworkShape {
        let mut widths = vec![self.layers[0].ncols()];
        widths.extend(self.layers.iter().map(|a| a.nrows()));
        NetworkShape { widths }
    }

    /// Whether every row has between 1 and `s` ones.
    pub fn respects_sparsity(&self, s: usize) -> bool {
        self.layers.iter().all(|a| {
            a.rows()
                .iter()
                .all(|r| (1..=s).contains(&(r.count_ones() as usize)))
        })
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| a.hamming(b))
            .sum()
    }

    pub fn entry_count(&self) -> usize {
        self.layers.iter().map(|a| a.nrows() * a.ncols()).sum()
    }
}

/// Dense symmetric real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn filled(dim: usize, off_diag: f64, diag: f64) -> Self {
        let mut data = vec![off_diag; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = diag;
        }
        Self { dim, data }
    }

    pub fn from_dense(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(ModelError::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds from upper-triangular entries including the diagonal, row-major.
    pub fn from_upper_with_diag(dim: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != dim * (dim + 1) / 2 {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * (dim + 1) / 2,
                upper.len()
            )));
        }
        let mut m = Self::filled(dim, 0.0, 0.0);
        let mut it = upper.iter();
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, *it.next().unwrap());
            }
        }
        Ok(m)
    }

    pub fn upper_with_diag(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            for j in i..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Entry `(perm[i], perm[j])` of the result is entry `(i, j)` here.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[perm[i] * self.dim + perm[j]] = self.get(i, j);
            }
        }
        out
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Optional closed intervals for the continuous parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationBounds {
    pub c: (f64, f64),
    pub gamma_diag: (f64, f64),
    pub gamma_off: (f64, f64),
}

impl TruncationBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("c", self.c),
            ("gamma_diag", self.gamma_diag),
            ("gamma_off", self.gamma_off),
        ] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(ModelError::InvalidParameter(format!(
                    "truncation interval for {name} is empty: [{lo}, {hi}]"
                )));
            }
        }
        if self.gamma_diag.1 <= 0.0 || self.gamma_off.1 <= 0.0 {
            return Err(ModelError::InvalidParameter(
                "Gamma upper bounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `nu`, `C_k` and `Gamma_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousParams {
    pub nu: Vec<f64>,
    pub c: Vec<f64>,
    pub gamma: Vec<SymMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<TruncationBounds>,
}

impl ContinuousParams {
    /// Uniform `nu`, a common intercept and `Gamma_k = off * 11^T + (diag - off) * I`.
    pub fn homogeneous(shape: &NetworkShape, c: f64, gamma_off: f64, gamma_diag: f64) -> Self {
        let m = shape.top_configurations();
        Self {
            nu: vec![1.0 / m as f64; m],
            c: vec![c; shape.depth()],
            gamma: (1..=shape.depth())
                .map(|k| SymMatrix::filled(shape.width(k - 1), gamma_off, gamma_diag))
                .collect(),
            bounds: None,
        }
    }

    /// `C_k` for `k` in `1..=K`.
    #[inline]
    pub fn c(&self, k: usize) -> f64 {
        self.c[k - 1]
    }

    #[inline]
    pub fn gamma(&self, k: usize) -> &SymMatrix {
        &self.gamma[k - 1]
    }

    pub fn validate(&self, shape: &NetworkShape) -> Result<()> {
        if self.nu.len() != shape.top_configurations() {
            return Err(ModelError::DimensionMismatch(format!(
                "nu has {} entries, shape needs {}",
                self.nu.len(),
                shape.top_configurations()
            )));
        }
        if self.nu.iter().any(|&v| !(v >= 0.0)) {
            return Err(ModelError::InvalidParameter(
                "nu entries must be nonnegative".into(),
            ));
        }
        let total: f64 = self.nu.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModelError::InvalidParameter(format!(
                "nu sums to {total}, not 1"
            )));
        }
        if self.c.len() != shape.depth() || self.gamma.len() != shape.depth() {
            return Err(ModelError::DimensionMismatch(
                "need one C_k and one Gamma_k per layer".into(),
            ));
        }
        for k in 1..=shape.depth() {
            let g = self.gamma(k);
            if g.dim() != shape.width(k - 1) {
                return Err(ModelError::DimensionMismatch(format!(
                    "Gamma_{k} is {0}x{0}, shape needs {1}x{1}",
                    g.dim(),
                    shape.width(k - 1)
                )));
            }
            if g.data().iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(ModelError::InvalidParameter(format!(
                    "Gamma_{k} entries must be finite and positive"
                )));
            }
            if !self.c(k).is_finite() {
                return Err(ModelError::InvalidParameter(format!("C_{k} is not finite")));
            }
        }
        if let Some(b) = &self.bounds {
            b.validate()?;
            let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
            for k in 1..=shape.depth() {
                if !inside(self.c(k), b.c) {
                    return Err(ModelError::InvalidParameter(format!(
                        "C_{k} lies outside its truncation interval"
                    )));
                }
                let g = self.gamma(k);
                for i in 0..g.dim() {
                    for j in i..g.dim() {
                        let iv = if i == j { b.gamma_diag } else { b.gamma_off };
                        if !inside(g.get(i, j), iv) {
                            return Err(ModelError::InvalidParameter(format!(
                                "Gamma_{k}[{i},{j}] lies outside its truncation interval"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Connection matrices together with the continuous parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub a: ConnectionMatrices,
    pub theta: ContinuousParams,
}

impl ModelParams {
    pub fn new(a: ConnectionMatrices, theta: ContinuousParams) -> Result<Self> {
        theta.validate(&a.shape())?;
        Ok(Self { a, theta })
    }

    pub fn shape(&self) -> NetworkShape {
        self.a.shape()
    }
}

/// One individual's adjacency matrices `X_0 .. X_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredSample {
    pub layers: Vec<Adjacency>,
}

impl LayeredSample {
    pub fn observed(&self) -> &Adjacency {
        self.layers.last().unwrap()
    }

    /// Layer `k` is latent unless it is the bottom layer.
    pub fn is_latent(&self, k: usize) -> bool {
        k + 1 < self.layers.len()
    }

    pub fn matches(&self, shape: &NetworkShape) -> bool {
        self.layers.len() == shape.depth() + 1
            && self
                .layers
                .iter()
                .enumerate()
                .all(|(k, x)| x.size() == shape.width(k))
    }
}

/// Numerically stable `log(1 + exp(x))`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function without the NaN check.
#[inline]
pub fn logistic(psi: f64) -> f64 {
    if psi >= 0.0 {
        1.0 / (1.0 + (-psi).exp())
    } else {
        let e = psi.exp();
        e / (1.0 + e)
    }
}

/// `exp(psi) / (1 + exp(psi))`.
pub fn edge_prob(psi: f64) -> Result<f64> {
    if psi.is_nan() {
        return Err(ModelError::NanLogit);
    }
    Ok(logistic(psi))
}

/// Log-probability of a Bernoulli outcome with log-odds `psi`.
#[inline]
pub fn bernoulli_logpmf(x: u8, psi: f64) -> f64 {
    if x == 1 {
        psi - softplus(psi)
    } else {
        -softplus(psi)
    }
}

/// `log(sum(exp(v)))`; all-impossible input gives [`IMPOSSIBLE`].
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return IMPOSSIBLE;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `C + a_i^T (Gamma * X_prev) a_j` for row masks `a_i`, `a_j`.
#[inline]
pub fn logit_masks(c: f64, gamma: &SymMatrix, a_i: u64, a_j: u64, x_prev: &Adjacency) -> f64 {
    let mut psi = c;
    for s in bits(a_i) {
        for t in bits(a_j) {
            if x_prev.get(s, t) == 1 {
                psi += gamma.get(s, t);
            }
        }
    }
    psi
}

/// Log-odds of the edge `(i, j)` at layer `k`, given the layer above.
pub fn logit_edge(
    i: usize,
    j: usize,
    x_prev: &Adjacency,
    a_k: &BinaryMatrix,
    c_k: f64,
    gamma_k: &SymMatrix,
) -> Result<f64> {
    let d = a_k.ncols();
    if x_prev.size() != d || gamma_k.dim() != d {
        return Err(ModelError::DimensionMismatch(format!(
            "A_k has {d} columns, X_prev is {0}x{0}, Gamma_k is {1}x{1}",
            x_prev.size(),
            gamma_k.dim()
        )));
    }
    if i >= a_k.nrows() || j >= a_k.nrows() {
        return Err(ModelError::DimensionMismatch(format!(
            "node index out of range for {} rows",
            a_k.nrows()
        )));
    }
    if i == j {
        return Err(ModelError::InvalidParameter(
            "logit is defined for off-diagonal pairs only".into(),
        ));
    }
    Ok(logit_masks(c_k, gamma_k, a_k.row(i), a_k.row(j), x_prev))
}

/// Log-probability of layer `k` given layer `k - 1`.
pub fn layer_loglik(
    x: &Adjacency,
    x_prev: &Adjacency,
    a_k: &BinaryMatrix,
    c_k: f64,
    gamma_k: &SymMatrix,
) -> f64 {
    pairs(x.size())
        .map(|(i, j)| {
            let psi = logit_masks(c_k, gamma_k, a_k.row(i), a_k.row(j), x_prev);
            bernoulli_logpmf(x.get(i, j), psi)
        })
        .sum()
}

fn check_sample(sample: &LayeredSample, params: &ModelParams) -> Result<()> {
    if !sample.matches(&params.shape()) {
        return Err(ModelError::DimensionMismatch(
            "sample layers do not match the network shape".into(),
        ));
    }
    Ok(())
}

/// `log P(X_0 | nu) + sum_k log P(X_k | X_{k-1}, A_k, Theta_k)`.
///
/// A zero `nu` entry at the sample's `X_0` yields [`IMPOSSIBLE`].
pub fn log_joint(sample: &LayeredSample, params: &ModelParams) -> Result<f64> {
    check_sample(sample, params)?;
    let nu = params.theta.nu[CanonicalIndex::encode(&sample.layers[0])];
    if nu <= 0.0 {
        return Ok(IMPOSSIBLE);
    }
    let mut total = nu.ln();
    for k in 1..sample.layers.len() {
        total += layer_loglik(
            &sample.layers[k],
            &sample.layers[k - 1],
            params.a.layer(k),
            params.theta.c(k),
            params.theta.gamma(k),
        );
    }
    Ok(total)
}

/// Exact `log P(X_K | A, Theta)` by enumerating every latent configuration.
pub fn marginal_loglik_obs(observed: &Adjacency, params: &ModelParams) -> Result<f64> {
    let shape = params.shape();
    let depth = shape.depth();
    if observed.size() != shape.observed_width() {
        return Err(ModelError::DimensionMismatch(format!(
            "observed matrix is {0}x{0}, shape needs {1}x{1}",
            observed.size(),
            shape.observed_width()
        )));
    }
    let radices: Vec<usize> = (0..depth)
        .map(|k| CanonicalIndex::cardinality(shape.width(k)))
        .collect();
    let needed: u128 = radices.iter().map(|&r| r as u128).product();
    if needed > ENUMERATION_BUDGET {
        return Err(ModelError::BudgetExceeded {
            needed,
            budget: ENUMERATION_BUDGET,
        });
    }
    let mut digits = vec![0usize; depth];
    let mut terms = Vec::with_capacity(needed as usize);
    loop {
        let mut layers: Vec<Adjacency> = digits
            .iter()
            .enumerate()
            .map(|(k, &code)| CanonicalIndex::decode(code, shape.width(k)))
            .collect();
        layers.push(observed.clone());
        terms.push(log_joint(&LayeredSample { layers }, params)?);
        // odometer increment, last latent layer fastest
        let mut pos = depth;
        loop {
            if pos == 0 {
                return Ok(log_sum_exp(&terms));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}
