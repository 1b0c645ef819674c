use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};

/// A diagnostic value, flagged when the variance it rests on is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub value: f64,
    pub degenerate: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Potential scale reduction over `M >= 2` traces of equal length `L >= 4`.
///
/// Zero within-chain variance gives 1 when the chain means agree and infinity when
/// they do not; both cases are flagged.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<Diagnostic> {
    if chains.len() < 2 {
        return Err(AnalysisError::TooShort {
            needed: 2,
            got: chains.len(),
        });
    }
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(AnalysisError::LengthMismatch(
            "chains have different lengths".into(),
        ));
    }
    if len < 4 {
        return Err(AnalysisError::TooShort { needed: 4, got: len });
    }
    let l = len as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = mean(&chains.iter().map(|c| sample_var(c)).collect::<Vec<_>>());
    let b = l * sample_var(&means);
    if w <= 0.0 {
        let value = if b <= 0.0 { 1.0 } else { f64::INFINITY };
        return Ok(Diagnostic {
            value,
            degenerate: true,
        });
    }
    let v = (l - 1.0) / l * w + b / l;
    Ok(Diagnostic {
        value: (v / w).sqrt(),
        degenerate: false,
    })
}

const GEWEKE_BATCHES: usize = 10;

/// Variance of a window mean from non-overlapping batch means.
fn batch_mean_var(x: &[f64]) -> f64 {
    let batches = GEWEKE_BATCHES.min(x.len());
    let size = x.len() / batches;
    // drop the leading remainder so every batch has the same size
    let start = x.len() - batches * size;
    let means: Vec<f64> = x[start..].chunks(size).map(mean).collect();
    sample_var(&means) / batches as f64
}

/// Geweke z-score comparing the first `first_frac` and last `last_frac` of a trace.
pub fn geweke(trace: &[f64], first_frac: f64, last_frac: f64) -> Result<Diagnostic> {
    if trace.len() < 20 {
        return Err(AnalysisError::TooShort {
            needed: 20,
            got: trace.len(),
        });
    }
    let n = trace.len();
    let n_first = ((n as f64 * first_frac).floor() as usize).max(2);
    let n_last = ((n as f64 * last_frac).floor() as usize).max(2);
    let first = &trace[..n_first];
    let last = &trace[n - n_last..];
    let diff = mean(first) - mean(last);
    let var = batch_mean_var(first) + batch_mean_var(last);
    if var <= 0.0 {
        let value = if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        return Ok(Diagnostic {
            value,
            degenerate: true,
        });
    }
    Ok(Diagnostic {
        value: diff / var.sqrt(),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identical_chains() {
        let c = vec![1.0, 2.0, 3.0, 4.0, 2.0];
        let r = gelman_rubin(&[c.clone(), c]).unwrap();
        // B = 0: sqrt((L-1)/L)
        assert!((r.value - (4.0f64 / 5.0).sqrt()).abs() < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn constant_chains_are_flagged() {
        let r = gelman_rubin(&[vec![2.0; 6], vec![2.0; 6]]).unwrap();
        assert_eq!(r, Diagnostic { value: 1.0, degenerate: true });
        let r = gelman_rubin(&[vec![0.0; 6], vec![1.0; 6]]).unwrap();
        assert!(r.degenerate && r.value.is_infinite());
    }

    #[test]
    fn separated_chains_diverge() {
        let a = vec![0.0, 0.1, 0.0, 0.1, 0.0, 0.1];
        let b = vec![1.0, 1.1, 1.0, 1.1, 1.0, 1.1];
        assert!(gelman_rubin(&[a, b]).unwrap().value > 1.1);
    }

    #[test]
    fn hand_two_by_four() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        // means 2.5, 5; within variances 5/3, 20/3
        let w = (5.0 / 3.0 + 20.0 / 3.0) / 2.0;
        let b_between = 4.0 * ((2.5f64 - 3.75).powi(2) + (5.0f64 - 3.75).powi(2));
        let expect = ((0.75 * w + b_between / 4.0) / w).sqrt();
        let r = gelman_rubin(&[a.to_vec(), b.to_vec()]).unwrap();
        assert!((r.value - expect).abs() < 1e-12);
    }

    #[test]
    fn input_checks() {
        assert!(gelman_rubin(&[vec![1.0; 5]]).is_err());
        assert!(gelman_rubin(&[vec![1.0; 3], vec![1.0; 3]]).is_err());
        assert!(gelman_rubin(&[vec![1.0; 5], vec![1.0; 6]]).is_err());
        assert!(geweke(&[0.0; 19], 0.1, 0.5).is_err());
    }

    #[test]
    fn geweke_constant_and_step() {
        assert_eq!(
            geweke(&[3.0; 100], 0.1, 0.5).unwrap(),
            Diagnostic { value: 0.0, degenerate: true }
        );
        let mut rng = seeded(1);
        let step: Vec<f64> = (0..200)
            .map(|t| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if t < 100 { z } else { 5.0 + z }
            })
            .collect();
        assert!(geweke(&step, 0.1, 0.5).unwrap().value.abs() > 5.0);
    }

    #[test]
    fn geweke_calibrated_on_iid_normals() {
        let mut rng = seeded(42);
        let inside = (0..200)
            .filter(|_| {
                let x: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
                geweke(&x, 0.1, 0.5).unwrap().value.abs() < 1.96
            })
            .count();
        assert!(inside >= 180, "{inside}/200 inside");
    }
}
