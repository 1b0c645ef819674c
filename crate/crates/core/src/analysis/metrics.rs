use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::assign::min_cost_assignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityMetrics {
    pub nmi: f64,
    pub accuracy: f64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

fn contingency(a: &[usize], b: &[usize]) -> (Vec<f64>, usize, usize) {
    let (a, ka) = compact(a);
    let (b, kb) = compact(b);
    let mut table = vec![0.0; ka * kb];
    for (x, y) in a.iter().zip(&b) {
        table[x * kb + y] += 1.0;
    }
    (table, ka, kb)
}

fn entropy(counts: impl Iterator<Item = f64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0.0)
        .map(|c| -(c / n) * (c / n).ln())
        .sum()
}

/// Normalized mutual information, normalized by the mean of the two entropies.
/// Two single-cluster labelings score 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch(format!(
            "{} vs {} labels",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(AnalysisError::Empty("no labels".into()));
    }
    let n = a.len() as f64;
    let (table, ka, kb) = contingency(a, b);
    let row: Vec<f64> = (0..ka).map(|i| table[i * kb..(i + 1) * kb].iter().sum()).collect();
    let col: Vec<f64> = (0..kb).map(|j| (0..ka).map(|i| table[i * kb + j]).sum()).collect();
    let (ha, hb) = (entropy(row.iter().copied(), n), entropy(col.iter().copied(), n));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let c = table[i * kb + j];
            if c > 0.0 {
                mi += c / n * (c * n / (row[i] * col[j])).ln();
            }
        }
    }
    Ok((mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0))
}

/// Fraction of agreeing labels under the best matching of predicted to true labels.
fn matched_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let (table, kp, kt) = contingency(pred, truth);
    let k = kp.max(kt);
    let mut cost = vec![0.0; k * k];
    for i in 0..kp {
        for j in 0..kt {
            cost[i * k + j] = -table[i * kt + j];
        }
    }
    let (_, total) = min_cost_assignment(&cost, k, k);
    -total / pred.len() as f64
}

pub fn community_metrics(pred: &[usize], truth: &[usize]) -> Result<CommunityMetrics> {
    let nmi = nmi(pred, truth)?;
    Ok(CommunityMetrics {
        nmi,
        accuracy: matched_accuracy(pred, truth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn identical_and_permuted() {
        let a = [0, 0, 1, 1, 2, 2];
        let m = community_metrics(&a, &a).unwrap();
        assert!((m.nmi - 1.0).abs() < 1e-12 && (m.accuracy - 1.0).abs() < 1e-12);
        let b = [5, 5, 3, 3, 9, 9];
        let m = community_metrics(&b, &a).unwrap();
        assert!((m.nmi - 1.0).abs() < 1e-12 && (m.accuracy - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&[1, 1], &[0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn hand_values() {
        let pred = [0, 0, 1, 1];
        let truth = [0, 1, 1, 1];
        let m = community_metrics(&pred, &truth).unwrap();
        assert!((m.accuracy - 0.75).abs() < 1e-12);
        // H(pred) = ln 2, H(truth) = H(1/4), MI = H(truth) - H(truth | pred) = H(1/4) - ln2/2
        let h = |p: f64| -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        let mi = h(0.25) - 0.5 * 2f64.ln();
        let expect = mi / ((2f64.ln() + h(0.25)) / 2.0);
        assert!((m.nmi - expect).abs() < 1e-12);
        // more predicted clusters than true ones
        let m = community_metrics(&[0, 1, 2, 3], &[0, 0, 1, 1]).unwrap();
        assert!((m.accuracy - 0.5).abs() < 1e-12);
        assert!(community_metrics(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn independent_labelings_have_near_zero_nmi() {
        let mut rng = seeded(3);
        let a: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..3)).collect();
        let b: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..3)).collect();
        assert!(nmi(&a, &b).unwrap() < 0.01);
    }

    proptest! {
        #[test]
        fn nmi_is_symmetric(
            pairs in prop::collection::vec((0usize..4, 0usize..5), 1..50)
        ) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let (x, y) = (nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }
}
