use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::gibbs::TraceRecord;
use crate::model::{pairs, ConnectionMatrices};

/// Grand-mean window for the active latent entries.
pub const ACTIVE_WINDOW: (f64, f64) = (0.01, 0.99);

/// Named scalar traces of `C_k`, the `Gamma_k` upper triangles and `nu`.
pub fn parameter_traces(records: &[TraceRecord]) -> Vec<(String, Vec<f64>)> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    let theta = &first.theta;
    for k in 1..=theta.c.len() {
        out.push((
            format!("c[{k}]"),
            records.iter().map(|r| r.theta.c(k)).collect(),
        ));
    }
    for k in 1..=theta.gamma.len() {
        let d = theta.gamma(k).dim();
        for i in 0..d {
            for j in i..d {
                out.push((
                    format!("gamma[{k}][{i},{j}]"),
                    records.iter().map(|r| r.theta.gamma(k).get(i, j)).collect(),
                ));
            }
        }
    }
    for m in 0..theta.nu.len() {
        out.push((
            format!("nu[{m}]"),
            records.iter().map(|r| r.theta.nu[m]).collect(),
        ));
    }
    out
}

/// Type-7 (linear interpolation) quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

fn summarize(name: String, values: &[f64]) -> ParamSummary {
    // Welford
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let sd = if values.len() > 1 {
        (m2 / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    ParamSummary {
        name,
        mean,
        sd,
        q025: quantile_sorted(&sorted, 0.025),
        q50: quantile_sorted(&sorted, 0.5),
        q975: quantile_sorted(&sorted, 0.975),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub draws: usize,
    pub params: Vec<ParamSummary>,
    /// Most frequent joint value of the connection matrices.
    pub a_mode: ConnectionMatrices,
    pub a_mode_frequency: f64,
    /// Per layer, row-major membership frequencies of `A_k`.
    pub a_means: Vec<Vec<f64>>,
    /// `[n][k][pair]` posterior edge frequencies of the latent layers, when recorded.
    pub latent_means: Option<Vec<Vec<Vec<f64>>>>,
}

pub fn posterior_summaries(records: &[TraceRecord]) -> Result<PosteriorSummary> {
    let Some(first) = records.first() else {
        return Err(AnalysisError::Empty("no kept draws".into()));
    };
    let t = records.len() as f64;
    let params = parameter_traces(records)
        .into_iter()
        .map(|(name, v)| summarize(name, &v))
        .collect();

    let mut counts: HashMap<&ConnectionMatrices, usize> = HashMap::new();
    for r in records {
        *counts.entry(&r.a).or_default() += 1;
    }
    // ties go to the state seen first
    let (mode, count) = records
        .iter()
        .map(|r| (&r.a, counts[&r.a]))
        .fold((&first.a, 0), |best, cur| if cur.1 > best.1 { cur } else { best });

    let a_means = first
        .a
        .layers()
        .iter()
        .enumerate()
        .map(|(k, layer)| {
            let (rows, cols) = (layer.nrows(), layer.ncols());
            let mut m = vec![0.0; rows * cols];
            for r in records {
                let a = &r.a.layers()[k];
                for i in 0..rows {
                    for c in 0..cols {
                        m[i * cols + c] += a.get(i, c) as f64 / t;
                    }
                }
            }
            m
        })
        .collect();

    let latent_means = if records.iter().all(|r| r.latents.is_some()) {
        let first_lat = first.latents.as_ref().unwrap();
        let mut means: Vec<Vec<Vec<f64>>> = first_lat
            .iter()
            .map(|s| s.iter().map(|x| vec![0.0; x.upper().len()]).collect())
            .collect();
        for r in records {
            for (n, sample) in r.latents.as_ref().unwrap().iter().enumerate() {
                for (k, x) in sample.iter().enumerate() {
                    for (idx, (i, j)) in pairs(x.size()).enumerate() {
                        means[n][k][idx] += x.get(i, j) as f64 / t;
                    }
                }
            }
        }
        Some(means)
    } else {
        None
    };

    Ok(PosteriorSummary {
        draws: records.len(),
        params,
        a_mode: mode.clone(),
        a_mode_frequency: count as f64 / t,
        a_means,
        latent_means,
    })
}

/// Entries whose mean over individuals lies strictly inside `window`.
pub fn active_entries(xbars: &[Vec<f64>], window: (f64, f64)) -> Vec<usize> {
    let Some(first) = xbars.first() else {
        return Vec::new();
    };
    let n = xbars.len() as f64;
    (0..first.len())
        .filter(|&l| {
            let m = xbars.iter().map(|x| x[l]).sum::<f64>() / n;
            m > window.0 && m < window.1
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub thresholds: Vec<f64>,
    /// Binary code per individual.
    pub codes: Vec<Vec<u8>>,
    /// The codes read as big-endian integers.
    pub labels: Vec<usize>,
}

/// Thresholds each latent posterior mean; default thresholds are per-entry medians.
pub fn cluster_individuals(
    xbars: &[Vec<f64>],
    thresholds: Option<&[f64]>,
) -> Result<ClusterAssignment> {
    let Some(first) = xbars.first() else {
        return Err(AnalysisError::Empty("no individuals".into()));
    };
    let l = first.len();
    if l == 0 {
        return Err(AnalysisError::Empty("no latent entries".into()));
    }
    if xbars.iter().any(|x| x.len() != l) {
        return Err(AnalysisError::LengthMismatch(
            "individuals have different entry counts".into(),
        ));
    }
    let thresholds = match thresholds {
        Some(m) if m.len() != l => {
            return Err(AnalysisError::LengthMismatch(format!(
                "{} thresholds for {l} entries",
                m.len()
            )))
        }
        Some(m) => m.to_vec(),
        None => (0..l)
            .map(|e| quantile(&xbars.iter().map(|x| x[e]).collect::<Vec<_>>(), 0.5))
            .collect(),
    };
    let codes: Vec<Vec<u8>> = xbars
        .iter()
        .map(|x| x.iter().zip(&thresholds).map(|(v, m)| (v > m) as u8).collect())
        .collect();
    let labels = codes
        .iter()
        .map(|c| c.iter().fold(0usize, |acc, &b| acc << 1 | b as usize))
        .collect();
    Ok(ClusterAssignment {
        thresholds,
        codes,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Phase;
    use crate::presets::sim_small_truth;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[7.0], 0.975), 7.0);
        assert!((quantile(&[0.0, 10.0], 0.025) - 0.25).abs() < 1e-12);
    }

    fn records_with_c(values: &[f64]) -> Vec<TraceRecord> {
        let truth = sim_small_truth();
        values
            .iter()
            .enumerate()
            .map(|(t, &c)| {
                let mut theta = truth.theta.clone();
                theta.c[0] = c;
                TraceRecord {
                    sweep: t,
                    phase: Phase::Standard,
                    a: truth.a.clone(),
                    theta,
                    loglik: None,
                    imputed: None,
                    latents: None,
                }
            })
            .collect()
    }

    #[test]
    fn constant_trace_summary() {
        let s = posterior_summaries(&records_with_c(&[-3.0; 10])).unwrap();
        let c1 = &s.params[0];
        assert_eq!(c1.name, "c[1]");
        assert_eq!((c1.mean, c1.sd, c1.q50), (-3.0, 0.0, -3.0));
        assert_eq!(s.a_mode, sim_small_truth().a);
        assert_eq!(s.a_mode_frequency, 1.0);
        assert!(s.latent_means.is_none());
        assert!(posterior_summaries(&[]).is_err());
    }

    #[test]
    fn streaming_matches_two_pass() {
        let mut rng = seeded(9);
        let v: Vec<f64> = (0..5000).map(|_| 1e6 + rng.random::<f64>()).collect();
        let s = posterior_summaries(&records_with_c(&v)).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!((s.params[0].mean - mean).abs() < 1e-12 * mean.abs());
        assert!((s.params[0].sd - var.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn clustering_examples() {
        let c = cluster_individuals(&[vec![0.1], vec![0.9]], None).unwrap();
        assert_eq!(c.thresholds, vec![0.5]);
        assert_eq!(c.codes, vec![vec![0], vec![1]]);

        let c = cluster_individuals(&[vec![0.1, 0.2], vec![0.3, 0.1]], Some(&[0.5, 0.5])).unwrap();
        assert_eq!(c.labels, vec![0, 0]);

        // medians 0.45 and 0.5
        let x = vec![
            vec![0.2, 0.9],
            vec![0.7, 0.6],
            vec![0.4, 0.1],
            vec![0.5, 0.4],
        ];
        let c = cluster_individuals(&x, None).unwrap();
        assert!((c.thresholds[0] - 0.45).abs() < 1e-12);
        assert!((c.thresholds[1] - 0.5).abs() < 1e-12);
        assert_eq!(c.codes, vec![vec![0, 1], vec![1, 1], vec![0, 0], vec![1, 0]]);
        assert_eq!(c.labels, vec![1, 3, 0, 2]);
    }

    #[test]
    fn active_window() {
        let x = vec![vec![0.0, 0.5, 1.0], vec![0.01, 0.4, 1.0]];
        assert_eq!(active_entries(&x, ACTIVE_WINDOW), vec![1]);
    }
}
