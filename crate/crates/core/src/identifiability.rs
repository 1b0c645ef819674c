//! Executable identifiability predicates for connection matrices.
//!
//! `M_d` is the class of binary `d x d` matrices with unit diagonal whose column pair
//! products `m_i m_j^T + m_j m_i^T` have pairwise distinct off-diagonal subset sums.
//! The spaces `A_1` and `A_2 = A_21 ∩ A_22 ∩ A_23` are built from it.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::model::{bits, pairs, BinaryMatrix, ConnectionMatrices};

/// Largest `d` for which membership in `M_d` is decided exactly.
pub const MAX_MD_DIM: usize = 6;

/// Default node budget for the `A_21` search.
pub const DEFAULT_NODE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum IdentError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} exceeds the exact-decision budget (d <= {MAX_MD_DIM})")]
    TooLarge(usize),
    #[error("census supports d in 1..=5, got {0}")]
    CensusRange(usize),
}

/// Tri-state outcome of a bounded search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Undecided,
}

impl Decision {
    pub fn and(self, other: Decision) -> Decision {
        match (self, other) {
            (Decision::No, _) | (_, Decision::No) => Decision::No,
            (Decision::Yes, Decision::Yes) => Decision::Yes,
            _ => Decision::Undecided,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Decision::Yes
        } else {
            Decision::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Decision::Yes
    }
}

/// Why a square matrix is not in `M_d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MdWitness {
    /// Diagonal entry `(i, i)` is zero.
    Diagonal(usize),
    /// Two distinct sets of column pairs `(i, j)`, `i < j`, with equal off-diagonal sums.
    Collision {
        first: Vec<(usize, usize)>,
        second: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MdReport {
    pub matrix: Vec<String>,
    pub in_class: bool,
    pub witness: Option<MdWitness>,
}

/// Off-diagonal (upper triangle) of `m_i m_j^T + m_j m_i^T` packed into 8-bit lanes.
///
/// Lane sums never exceed `2 * d(d-1)/2 = 30` for `d <= 6`, so lanes never carry.
#[inline]
fn pair_fingerprint(d: usize, mi: u64, mj: u64) -> u128 {
    let mut packed = 0u128;
    for (lane, (u, v)) in pairs(d).enumerate() {
        let val = ((mi >> u) & (mj >> v) & 1) + ((mj >> u) & (mi >> v) & 1);
        packed |= (val as u128) << (8 * lane);
    }
    packed
}

/// Open-addressing set of fingerprints with generation stamps, reused across queries.
struct FingerprintTable {
    keys: Vec<u128>,
    subsets: Vec<u32>,
    stamps: Vec<u32>,
    generation: u32,
    mask: usize,
}

impl FingerprintTable {
    fn new() -> Self {
        Self {
            keys: Vec::new(),
            subsets: Vec::new(),
            stamps: Vec::new(),
            generation: 0,
            mask: 0,
        }
    }

    fn reset(&mut self, entries: usize) {
        let cap = (2 * entries).next_power_of_two().max(16);
        if cap > self.keys.len() {
            self.keys = vec![0; cap];
            self.subsets = vec![0; cap];
            self.stamps = vec![0; cap];
            self.generation = 0;
        }
        self.mask = self.keys.len() - 1;
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    /// Inserts `key`; returns the subset stored under an equal key, if any.
    #[inline]
    fn insert(&mut self, key: u128, subset: u32) -> Option<u32> {
        let h = ((key as u64) ^ ((key >> 64) as u64).rotate_left(29))
            .wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut slot = (h >> 20) as usize & self.mask;
        loop {
            if self.stamps[slot] != self.generation {
                self.stamps[slot] = self.generation;
                self.keys[slot] = key;
                self.subsets[slot] = subset;
                return None;
            }
            if self.keys[slot] == key {
                return Some(self.subsets[slot]);
            }
            slot = (slot + 1) & self.mask;
        }
    }
}

/// Searches for two distinct pair subsets with equal fingerprint sums, using the
/// first `cols.len()` columns (each a `d`-bit mask). Returns the colliding subsets
/// as bitmasks over `pairs(cols.len())`.
fn find_collision(d: usize, cols: &[u64], table: &mut FingerprintTable) -> Option<(u32, u32)> {
    let s = cols.len();
    let gs: Vec<u128> = pairs(s)
        .map(|(i, j)| pair_fingerprint(d, cols[i], cols[j]))
        .collect();
    let m = gs.len();
    // a zero contribution collides with the empty set right away
    if let Some(b) = gs.iter().position(|&g| g == 0) {
        return Some((0, 1 << b));
    }
    table.reset(1usize << m);
    let mut sum = 0u128;
    table.insert(0, 0);
    for step in 1u32..(1u32 << m) {
        let b = step.trailing_zeros() as usize;
        let gray = step ^ (step >> 1);
        if gray >> b & 1 == 1 {
            sum += gs[b];
        } else {
            sum -= gs[b];
        }
        if let Some(prev) = table.insert(sum, gray) {
            return Some((prev, gray));
        }
    }
    None
}

fn columns_of(m: &BinaryMatrix) -> Vec<u64> {
    (0..m.ncols())
        .map(|c| {
            (0..m.nrows()).fold(0u64, |acc, r| acc | ((m.get(r, c) as u64) << r))
        })
        .collect()
}

fn subset_pairs(s: usize, subset: u32) -> Vec<(usize, usize)> {
    pairs(s)
        .enumerate()
        .filter(|(b, _)| subset >> b & 1 == 1)
        .map(|(_, p)| p)
        .collect()
}

/// Decides membership of a square binary matrix in `M_d`, with a witness on failure.
pub fn in_class_md(m: &BinaryMatrix) -> Result<MdReport, IdentError> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(IdentError::NotSquare {
            rows: d,
            cols: m.ncols(),
        });
    }
    if d > MAX_MD_DIM {
        return Err(IdentError::TooLarge(d));
    }
    let matrix = m.to_strings();
    if let Some(i) = (0..d).find(|&i| m.get(i, i) == 0) {
        return Ok(MdReport {
            matrix,
            in_class: false,
            witness: Some(MdWitness::Diagonal(i)),
        });
    }
    let cols = columns_of(m);
    let mut table = FingerprintTable::new();
    let witness = find_collision(d, &cols, &mut table).map(|(a, b)| MdWitness::Collision {
        first: subset_pairs(d, a),
        second: subset_pairs(d, b),
    });
    Ok(MdReport {
        matrix,
        in_class: witness.is_none(),
        witness,
    })
}

/// Off-diagonal sum matrix (dense, row-major) of a set of column pairs.
pub fn off_diagonal_sum(m: &BinaryMatrix, pair_set: &[(usize, usize)]) -> Vec<u32> {
    let d = m.nrows();
    let mut out = vec![0u32; d * d];
    for &(i, j) in pair_set {
        for u in 0..d {
            for v in 0..d {
                if u != v {
                    out[u * d + v] += (m.get(u, i) * m.get(v, j) + m.get(u, j) * m.get(v, i)) as u32;
                }
            }
        }
    }
    out
}

fn distinct(values: &[u64]) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Every column `i` of `A_k` appears as a pure row `e_i` at least twice, and
/// `p_k >= 2 p_{k-1}`, for every layer.
pub fn in_a1(a: &ConnectionMatrices) -> bool {
    a.layers().iter().all(layer_in_a1)
}

pub fn layer_in_a1(a: &BinaryMatrix) -> bool {
    let d = a.ncols();
    a.nrows() >= 2 * d
        && (0..d).all(|i| a.rows().iter().filter(|&&r| r == 1 << i).count() >= 2)
}

/// Pairwise distinct columns in every layer.
pub fn in_a22(a: &ConnectionMatrices) -> bool {
    a.layers().iter().all(layer_in_a22)
}

pub fn layer_in_a22(a: &BinaryMatrix) -> bool {
    distinct(&columns_of(a))
}

/// `rank(D_k) = p_{k-1} + 1` in every layer, where `D_k` stacks `(1, a_i * a_j)`.
pub fn in_a23(a: &ConnectionMatrices) -> bool {
    a.layers().iter().all(layer_in_a23)
}

pub fn layer_in_a23(a: &BinaryMatrix) -> bool {
    let d = a.ncols();
    let mut products: Vec<u64> = pairs(a.nrows())
        .map(|(i, j)| a.row(i) & a.row(j))
        .collect();
    products.sort_unstable();
    products.dedup();
    let rows: Vec<Vec<i64>> = products
        .iter()
        .map(|&p| {
            std::iter::once(1)
                .chain((0..d).map(|c| (p >> c & 1) as i64))
                .collect()
        })
        .collect();
    integer_rank(&rows, d + 1) == d + 1
}

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn integer_rank(rows: &[Vec<i64>], ncols: usize) -> usize {
    let small: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    match bareiss_rank_i128(small, ncols) {
        Some(r) => r,
        None => bareiss_rank_big(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
            ncols,
        ),
    }
}

/// `None` on overflow.
fn bareiss_rank_i128(mut m: Vec<Vec<i128>>, ncols: usize) -> Option<usize> {
    let nrows = m.len();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = m[rank][col]
                    .checked_mul(m[r][c])?
                    .checked_sub(m[r][col].checked_mul(m[rank][c])?)?;
                m[r][c] = v / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    Some(rank)
}

fn bareiss_rank_big(mut m: Vec<Vec<BigInt>>, ncols: usize) -> usize {
    let nrows = m.len();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = &m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c];
                m[r][c] = v / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Backtracking search for two disjoint row selections forming `M_d` blocks.
struct A21Search<'a> {
    d: usize,
    patterns: Vec<u64>,
    counts: Vec<usize>,
    nodes: u64,
    cap: u64,
    prefix_ok: HashMap<Vec<u64>, bool>,
    table: &'a mut FingerprintTable,
}

enum Outcome {
    Found,
    Exhausted,
    Capped,
}

impl A21Search<'_> {
    fn prefix_valid(&mut self, cols: &[u64]) -> bool {
        if cols.len() < 2 {
            return true;
        }
        if let Some(&v) = self.prefix_ok.get(cols) {
            return v;
        }
        let v = find_collision(self.d, cols, self.table).is_none();
        self.prefix_ok.insert(cols.to_vec(), v);
        v
    }

    /// Fills slot `cols.len()` of block `block` (0 = first, 1 = second).
    fn search(&mut self, block: usize, cols: &mut Vec<u64>) -> Outcome {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Outcome::Capped;
        }
        let slot = cols.len();
        if slot == self.d {
            if block == 1 {
                return Outcome::Found;
            }
            let mut second = Vec::with_capacity(self.d);
            return self.search(1, &mut second);
        }
        for idx in 0..self.patterns.len() {
            let pat = self.patterns[idx];
            if self.counts[idx] == 0 || pat >> slot & 1 == 0 {
                continue;
            }
            self.counts[idx] -= 1;
            cols.push(pat);
            let outcome = if self.prefix_valid(cols) {
                self.search(block, cols)
            } else {
                Outcome::Exhausted
            };
            cols.pop();
            self.counts[idx] += 1;
            match outcome {
                Outcome::Exhausted => {}
                other => return other,
            }
        }
        Outcome::Exhausted
    }
}

/// Whether some row permutation puts two `M_d` blocks on top of `A_k`.
pub fn layer_in_a21(a: &BinaryMatrix, node_cap: u64) -> Result<Decision, IdentError> {
    let d = a.ncols();
    if d > MAX_MD_DIM {
        return Err(IdentError::TooLarge(d));
    }
    if a.nrows() < 2 * d {
        return Ok(Decision::No);
    }
    let mut grouped: HashMap<u64, usize> = HashMap::new();
    for &r in a.rows() {
        *grouped.entry(r).or_default() += 1;
    }
    let mut entries: Vec<(u64, usize)> = grouped.into_iter().collect();
    // pure rows first, then by weight and value for a deterministic order
    entries.sort_by_key(|&(p, _)| (p.count_ones(), p));
    let mut table = FingerprintTable::new();
    let mut search = A21Search {
        d,
        patterns: entries.iter().map(|e| e.0).collect(),
        counts: entries.iter().map(|e| e.1).collect(),
        nodes: 0,
        cap: node_cap,
        prefix_ok: HashMap::new(),
        table: &mut table,
    };
    let mut cols = Vec::with_capacity(d);
    Ok(match search.search(0, &mut cols) {
        Outcome::Found => Decision::Yes,
        Outcome::Exhausted => Decision::No,
        Outcome::Capped => Decision::Undecided,
    })
}

pub fn in_a21(a: &ConnectionMatrices, node_cap: u64) -> Result<Decision, IdentError> {
    let mut acc = Decision::Yes;
    for layer in a.layers() {
        acc = acc.and(layer_in_a21(layer, node_cap)?);
        if acc == Decision::No {
            break;
        }
    }
    Ok(acc)
}

fn has_all_ones_column(a: &BinaryMatrix) -> bool {
    (0..a.ncols()).any(|c| a.rows().iter().all(|&r| r >> c & 1 == 1))
}

/// Whether the single-predicate shortcut applies: `S <= 2`, `p_0 >= 3` and no
/// all-ones column in any layer.
pub fn shortcut_applies(a: &ConnectionMatrices, sparsity: usize) -> bool {
    (1..=2).contains(&sparsity)
        && a.layer(1).ncols() >= 3
        && !a.layers().iter().any(has_all_ones_column)
}

/// Membership in `A_2`. With `use_shortcut`, `A_21` alone decides when
/// [`shortcut_applies`]; otherwise all three predicates are evaluated.
pub fn in_a2(
    a: &ConnectionMatrices,
    sparsity: usize,
    use_shortcut: bool,
    node_cap: u64,
) -> Result<Decision, IdentError> {
    let a21 = in_a21(a, node_cap)?;
    if use_shortcut && shortcut_applies(a, sparsity) {
        return Ok(a21);
    }
    Ok(a21
        .and(Decision::from_bool(in_a22(a)))
        .and(Decision::from_bool(in_a23(a))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdCensus {
    pub d: usize,
    /// Unit-diagonal matrices with pairwise distinct columns.
    pub distinct_columns: u64,
    pub in_class: u64,
    pub fraction: f64,
}

/// Exhaustive count over all unit-diagonal `d x d` binary matrices.
pub fn md_census(d: usize) -> Result<MdCensus, IdentError> {
    use rayon::prelude::*;
    if !(1..=5).contains(&d) {
        return Err(IdentError::CensusRange(d));
    }
    let off = d * (d - 1);
    let total = 1u64 << off;
    let chunks = 64u64.min(total);
    let per = total / chunks;
    let (distinct_columns, in_class) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut table = FingerprintTable::new();
            let (mut dc, mut ic) = (0u64, 0u64);
            let mut cols = vec![0u64; d];
            for code in chunk * per..(chunk + 1) * per {
                // fill off-diagonal bits column by column
                let mut bit = 0;
                for (c, col) in cols.iter_mut().enumerate() {
                    let mut mask = 1u64 << c;
                    for r in (0..d).filter(|&r| r != c) {
                        mask |= ((code >> bit) & 1) << r;
                        bit += 1;
                    }
                    *col = mask;
                }
                if !distinct(&cols) {
                    continue;
                }
                dc += 1;
                if find_collision(d, &cols, &mut table).is_none() {
                    ic += 1;
                }
            }
            (dc, ic)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(MdCensus {
        d,
        distinct_columns,
        in_class,
        fraction: in_class as f64 / distinct_columns as f64,
    })
}

/// Row masks of the columns of a square matrix; handy for building `M_d` blocks.
pub fn column_masks(m: &BinaryMatrix) -> Vec<u64> {
    columns_of(m)
}

/// Ones of a row mask, for reports.
pub fn support(mask: u64) -> Vec<usize> {
    bits(mask).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkShape;
    use proptest::prelude::*;

    fn mat(rows: &[&str]) -> BinaryMatrix {
        BinaryMatrix::from_strings(rows).unwrap()
    }

    #[test]
    fn identity_and_small_examples() {
        assert!(in_class_md(&mat(&["100", "010", "001"])).unwrap().in_class);
        assert!(in_class_md(&mat(&["110", "010", "001"])).unwrap().in_class);
        let r = in_class_md(&mat(&["110", "011", "101"])).unwrap();
        assert!(!r.in_class);
        assert!(r.witness.is_some());
        let r = in_class_md(&mat(&["10", "00"])).unwrap();
        assert_eq!(r.witness, Some(MdWitness::Diagonal(1)));
    }

    #[test]
    fn witnesses_reverify() {
        let m = mat(&["110", "110", "101"]);
        let r = in_class_md(&m).unwrap();
        let Some(MdWitness::Collision { first, second }) = r.witness else {
            panic!("expected a collision");
        };
        assert_ne!(first, second);
        assert_eq!(off_diagonal_sum(&m, &first), off_diagonal_sum(&m, &second));
    }

    #[test]
    fn size_limits() {
        let big = BinaryMatrix::from_rows(7, (0..7).map(|i| 1 << i).collect()).unwrap();
        assert_eq!(in_class_md(&big), Err(IdentError::TooLarge(7)));
        assert!(matches!(
            in_class_md(&mat(&["10", "01", "11"])),
            Err(IdentError::NotSquare { .. })
        ));
    }

    /// Definition-level oracle: compare every pair of subsets' dense sums.
    fn brute_force_md(m: &BinaryMatrix) -> bool {
        let d = m.nrows();
        if (0..d).any(|i| m.get(i, i) == 0) {
            return false;
        }
        let all: Vec<(usize, usize)> = pairs(d).collect();
        let mut seen = std::collections::HashSet::new();
        for subset in 0u32..(1 << all.len()) {
            let chosen: Vec<_> = all
                .iter()
                .enumerate()
                .filter(|(b, _)| subset >> b & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            if !seen.insert(off_diagonal_sum(m, &chosen)) {
                return false;
            }
        }
        true
    }

    fn square(d: usize, code: u64) -> BinaryMatrix {
        let dense: Vec<u8> = (0..d * d)
            .map(|idx| {
                if idx / d == idx % d {
                    1
                } else {
                    (code >> idx & 1) as u8
                }
            })
            .collect();
        BinaryMatrix::from_dense(d, d, &dense).unwrap()
    }

    proptest! {
        #[test]
        fn fast_path_matches_definition(d in 2usize..=4, code in any::<u64>()) {
            let m = square(d, code);
            prop_assert_eq!(in_class_md(&m).unwrap().in_class, brute_force_md(&m));
        }

        #[test]
        fn duplicate_columns_never_in_class(d in 3usize..=5, code in any::<u64>(), i in 0usize..5, j in 0usize..5) {
            let (i, j) = (i % d, j % d);
            prop_assume!(i != j);
            let m = square(d, code);
            let mut dense: Vec<u8> = (0..d * d).map(|x| m.get(x / d, x % d)).collect();
            for r in 0..d { dense[r * d + j] = dense[r * d + i]; }
            dense[j * d + j] = 1;
            dense[i * d + i] = 1;
            let m = BinaryMatrix::from_dense(d, d, &dense).unwrap();
            let cols = column_masks(&m);
            prop_assume!(cols[i] == cols[j]);
            prop_assert!(!in_class_md(&m).unwrap().in_class);
        }

        #[test]
        fn members_have_kruskal_rank_three(d in 3usize..=5, code in any::<u64>()) {
            let m = square(d, code);
            prop_assume!(in_class_md(&m).unwrap().in_class);
            for a in 0..d { for b in a + 1..d { for c in b + 1..d {
                let rows: Vec<Vec<i64>> = (0..d)
                    .map(|r| vec![m.get(r, a) as i64, m.get(r, b) as i64, m.get(r, c) as i64])
                    .collect();
                prop_assert_eq!(integer_rank(&rows, 3), 3);
            }}}
        }
    }

    #[test]
    fn bareiss_matches_known_ranks() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]];
        assert_eq!(integer_rank(&rows, 3), 2);
        let big: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 1 << 40 } else { 1 }).collect()).collect();
        assert_eq!(integer_rank(&big, 3), 3);
        assert_eq!(bareiss_rank_big(big.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect(), 3), 3);
    }

    fn stacked(layers: Vec<BinaryMatrix>) -> ConnectionMatrices {
        let mut widths = vec![layers[0].ncols()];
        widths.extend(layers.iter().map(|l| l.nrows()));
        ConnectionMatrices::new(&NetworkShape::new(widths).unwrap(), layers).unwrap()
    }

    #[test]
    fn identity_stack_is_in_every_space() {
        let a = stacked(vec![mat(&["100", "010", "001", "100", "010", "001"])]);
        assert!(in_a1(&a));
        assert_eq!(in_a21(&a, DEFAULT_NODE_CAP).unwrap(), Decision::Yes);
        assert!(in_a22(&a));
        assert!(in_a23(&a));
        assert_eq!(in_a2(&a, 1, false, DEFAULT_NODE_CAP).unwrap(), Decision::Yes);
    }

    #[test]
    fn a23_two_column_identity_stack() {
        let a = stacked(vec![mat(&["10", "01", "10", "01"])]);
        assert!(in_a23(&a));
        let ones = stacked(vec![mat(&["11", "11", "11", "11"])]);
        assert!(!in_a23(&ones));
    }

    #[test]
    fn zero_column_blocks_a21() {
        let a = stacked(vec![mat(&["100", "100", "010", "010", "110", "110"])]);
        assert_eq!(in_a21(&a, DEFAULT_NODE_CAP).unwrap(), Decision::No);
        assert!(!in_a1(&a));
    }

    #[test]
    fn generic_but_not_strict() {
        let a = stacked(vec![mat(&["100", "010", "001", "100", "110", "001"])]);
        assert!(!in_a1(&a));
        assert_eq!(in_a21(&a, DEFAULT_NODE_CAP).unwrap(), Decision::Yes);
        assert!(in_a22(&a) && in_a23(&a));
    }

    #[test]
    fn duplicate_columns_fail_a22() {
        let a = stacked(vec![mat(&["110", "110", "001", "110", "110", "001"])]);
        assert!(!in_a22(&a));
    }

    #[test]
    fn tiny_cap_is_undecided() {
        let a = stacked(vec![mat(&["100", "010", "001", "100", "010", "001"])]);
        assert_eq!(in_a21(&a, 2).unwrap(), Decision::Undecided);
    }

    #[test]
    fn all_ones_column_disables_shortcut() {
        let a = stacked(vec![mat(&["110", "101", "100", "110", "101", "100"])]);
        assert!(!shortcut_applies(&a, 2));
        assert_eq!(
            in_a2(&a, 2, true, DEFAULT_NODE_CAP).unwrap(),
            in_a2(&a, 2, false, DEFAULT_NODE_CAP).unwrap()
        );
    }

    #[test]
    fn census_d3_exact_counts() {
        let c = md_census(3).unwrap();
        assert_eq!(c.d, 3);
        assert!(c.in_class <= c.distinct_columns);
        // brute-force cross-check over all 64 unit-diagonal matrices
        let mut dc = 0;
        let mut ic = 0;
        for code in 0..(1u64 << 9) {
            let m = square(3, code);
            if (0..9).any(|idx| idx / 3 == idx % 3 && code >> idx & 1 == 1) {
                continue;
            }
            if distinct(&column_masks(&m)) {
                dc += 1;
                if brute_force_md(&m) {
                    ic += 1;
                }
            }
        }
        assert_eq!((c.distinct_columns, c.in_class), (dc, ic));
    }
}
