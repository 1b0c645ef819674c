use super::{AnalysisError, Result};
use crate::gibbs::{ChainTrace, EdgeMask};

/// Posterior edge probability of every masked entry: the mean imputed value over
/// kept draws, in mask order.
pub fn predict_missing(trace: &ChainTrace, mask: &EdgeMask) -> Result<Vec<f64>> {
    if trace.mask != mask.entries() {
        return Err(AnalysisError::MaskMismatch);
    }
    if mask.is_empty() {
        return Ok(Vec::new());
    }
    if trace.records.is_empty() {
        return Err(AnalysisError::Empty("no kept draws".into()));
    }
    let mut sums = vec![0.0; mask.len()];
    for r in &trace.records {
        let imputed = r.imputed.as_ref().ok_or(AnalysisError::MaskMismatch)?;
        if imputed.len() != sums.len() {
            return Err(AnalysisError::MaskMismatch);
        }
        for (s, &v) in sums.iter_mut().zip(imputed) {
            *s += v as f64;
        }
    }
    let t = trace.records.len() as f64;
    Ok(sums.into_iter().map(|s| s / t).collect())
}

/// Area under the ROC curve via the Mann-Whitney statistic with midranks.
///
/// `None` when either class is empty.
pub fn auc(labels: &[bool], scores: &[f64]) -> Result<Option<f64>> {
    if labels.len() != scores.len() {
        return Err(AnalysisError::LengthMismatch(format!(
            "{} labels, {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let mid = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = mid;
        }
        start = end + 1;
    }
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Ok(None);
    }
    let rank_sum: f64 = labels.iter().zip(&ranks).filter(|(l, _)| **l).map(|(_, r)| r).sum();
    let u = rank_sum - pos * (pos + 1.0) / 2.0;
    Ok(Some(u / (pos * neg)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{Phase, TraceRecord};
    use crate::presets::sim_small_truth;
    use proptest::prelude::*;

    fn masked_trace(imputed: Vec<Vec<u8>>, mask: &EdgeMask) -> ChainTrace {
        let truth = sim_small_truth();
        ChainTrace {
            shape: truth.shape(),
            records: imputed
                .into_iter()
                .enumerate()
                .map(|(t, v)| TraceRecord {
                    sweep: t,
                    phase: Phase::Standard,
                    a: truth.a.clone(),
                    theta: truth.theta.clone(),
                    loglik: None,
                    imputed: Some(v),
                    latents: None,
                })
                .collect(),
            mask: mask.entries().to_vec(),
            initial_a: truth.a.clone(),
            init_diagnostics: Vec::new(),
            sweeps: 0,
            pg_anomalies: 0,
        }
    }

    #[test]
    fn averages_imputations() {
        let mask = EdgeMask::new(16, vec![(0, 1, 2), (3, 0, 5)]).unwrap();
        let trace = masked_trace(vec![vec![1, 0], vec![1, 1], vec![1, 0], vec![1, 0]], &mask);
        assert_eq!(predict_missing(&trace, &mask).unwrap(), vec![1.0, 0.25]);
        let other = EdgeMask::new(16, vec![(0, 1, 2)]).unwrap();
        assert_eq!(predict_missing(&trace, &other), Err(AnalysisError::MaskMismatch));
        assert!(predict_missing(&masked_trace(vec![], &EdgeMask::empty()), &EdgeMask::empty())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn auc_extremes() {
        let labels = [false, false, true, true];
        assert_eq!(auc(&labels, &[0.1, 0.2, 0.8, 0.9]).unwrap(), Some(1.0));
        assert_eq!(auc(&labels, &[0.9, 0.8, 0.2, 0.1]).unwrap(), Some(0.0));
        assert_eq!(auc(&[true, true], &[0.1, 0.2]).unwrap(), None);
        assert!(auc(&[true], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn auc_with_ties() {
        // positives 0.5, 0.9; negatives 0.5, 0.1: pairs (0.5>0.1)=1, (0.5=0.5)=1/2,
        // (0.9>0.5)=1, (0.9>0.1)=1 -> 3.5 / 4
        let labels = [true, true, false, false];
        let scores = [0.5, 0.9, 0.5, 0.1];
        assert_eq!(auc(&labels, &scores).unwrap(), Some(0.875));
    }

    proptest! {
        #[test]
        fn auc_invariant_to_monotone_maps(
            data in prop::collection::vec((any::<bool>(), 0u8..20), 2..40)
        ) {
            let labels: Vec<bool> = data.iter().map(|d| d.0).collect();
            let scores: Vec<f64> = data.iter().map(|d| d.1 as f64 / 20.0).collect();
            let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(auc(&labels, &scores).unwrap(), auc(&labels, &mapped).unwrap());
        }
    }
}
