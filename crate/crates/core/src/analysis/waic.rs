use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::model::log_sum_exp;

/// Per-draw, per-sample log-likelihoods `l(t, n)`, stored row-major (`T x N`).
#[derive(Debug, Clone, PartialEq)]
pub struct LoglikMatrix {
    draws: usize,
    samples: usize,
    data: Vec<f64>,
}

impl LoglikMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let draws = rows.len();
        if draws == 0 {
            return Err(AnalysisError::Empty("no draws".into()));
        }
        let samples = rows[0].len();
        let mut data = Vec::with_capacity(draws * samples);
        for (t, row) in rows.into_iter().enumerate() {
            if row.len() != samples {
                return Err(AnalysisError::LengthMismatch(format!(
                    "draw {t} has {} samples, draw 0 has {samples}",
                    row.len()
                )));
            }
            if let Some(n) = row.iter().position(|v| !v.is_finite()) {
                return Err(AnalysisError::NonFinite { t, n });
            }
            data.extend(row);
        }
        Ok(Self {
            draws,
            samples,
            data,
        })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn get(&self, t: usize, n: usize) -> f64 {
        self.data[t * self.samples + n]
    }

    pub fn column(&self, n: usize) -> Vec<f64> {
        (0..self.draws).map(|t| self.get(t, n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waic {
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
}

/// `WAIC = -2 (lppd - p_WAIC)` with the variance form of the penalty.
pub fn waic(l: &LoglikMatrix) -> Waic {
    let t = l.draws() as f64;
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    for n in 0..l.samples() {
        let col = l.column(n);
        lppd += log_sum_exp(&col) - t.ln();
        if l.draws() > 1 {
            let mean = col.iter().sum::<f64>() / t;
            p_waic += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
        }
    }
    Waic {
        waic: -2.0 * lppd + 2.0 * p_waic,
        lppd,
        p_waic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_draw_has_no_penalty() {
        let l = LoglikMatrix::new(vec![vec![-1.0, -2.5]]).unwrap();
        let w = waic(&l);
        assert_eq!(w.p_waic, 0.0);
        assert!((w.waic - 7.0).abs() < 1e-12);
    }

    #[test]
    fn constant_columns_have_no_penalty() {
        let l = LoglikMatrix::new(vec![vec![-1.0, -3.0]; 5]).unwrap();
        assert!(waic(&l).p_waic.abs() < 1e-15);
    }

    #[test]
    fn two_draw_hand_value() {
        let (a, b) = (0.2f64.ln(), 0.4f64.ln());
        let w = waic(&LoglikMatrix::new(vec![vec![a], vec![b]]).unwrap());
        let mean = (a + b) / 2.0;
        let var = (a - mean).powi(2) + (b - mean).powi(2);
        assert!((w.lppd - 0.3f64.ln()).abs() < 1e-12);
        assert!((w.p_waic - var).abs() < 1e-12);
        assert!((w.waic - (-2.0 * (0.3f64.ln() - var))).abs() < 1e-12);
    }

    #[test]
    fn rejects_ragged_and_nan() {
        assert!(LoglikMatrix::new(vec![]).is_err());
        assert!(LoglikMatrix::new(vec![vec![0.0], vec![0.0, 1.0]]).is_err());
        assert_eq!(
            LoglikMatrix::new(vec![vec![0.0, f64::NAN]]),
            Err(AnalysisError::NonFinite { t: 0, n: 1 })
        );
    }
}
