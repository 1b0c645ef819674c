//! File formats: MPX-JSON datasets and masks, ground-truth files, NDJSON traces.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use mplex::gibbs::{Phase, TraceRecord};
use mplex::model::pair_count;
use mplex::{
    Adjacency, BinaryMatrix, ConnectionMatrices, ContinuousParams, EdgeMask, ModelParams,
    NetworkShape, SymMatrix,
};

use crate::CliError;

pub const FORMAT: &str = "mpx-v1";

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn check_format(found: &str) -> Result<(), CliError> {
    if found != FORMAT {
        return Err(CliError::Format(format!(
            "unsupported format {found:?}, expected {FORMAT:?}"
        )));
    }
    Ok(())
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

fn string_to_bits(s: &str) -> Result<Vec<u8>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(CliError::Format(format!("unexpected character {other:?} in 0/1 string"))),
        })
        .collect()
}

/// Observed networks: upper triangles in row-major `(i, j)`, `i < j`, order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub format: String,
    #[serde(rename = "p_K")]
    pub p_k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: Vec<String>,
}

impl DatasetFile {
    pub fn from_adjacency(p: usize, data: &[Adjacency]) -> Self {
        Self {
            format: FORMAT.into(),
            p_k: p,
            n: data.len(),
            samples: data.iter().map(|x| bits_to_string(&x.upper())).collect(),
        }
    }

    pub fn to_adjacency(&self) -> Result<Vec<Adjacency>, CliError> {
        check_format(&self.format)?;
        if self.samples.len() != self.n {
            return Err(CliError::Format(format!(
                "N = {} but {} samples listed",
                self.n,
                self.samples.len()
            )));
        }
        let want = pair_count(self.p_k);
        self.samples
            .iter()
            .enumerate()
            .map(|(idx, s)| {
                if s.len() != want {
                    return Err(CliError::Format(format!(
                        "sample {idx} has {} entries, p_K = {} needs {want}",
                        s.len(),
                        self.p_k
                    )));
                }
                Adjacency::from_upper(self.p_k, &string_to_bits(s)?)
                    .map_err(|e| CliError::Format(e.to_string()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskFile {
    pub format: String,
    #[serde(rename = "p_K")]
    pub p_k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<(usize, usize, usize)>,
}

impl MaskFile {
    pub fn from_mask(p: usize, n: usize, mask: &EdgeMask) -> Self {
        Self {
            format: FORMAT.into(),
            p_k: p,
            n,
            entries: mask.entries().to_vec(),
        }
    }

    pub fn to_mask(&self) -> Result<EdgeMask, CliError> {
        check_format(&self.format)?;
        if let Some(e) = self.entries.iter().find(|e| e.0 >= self.n) {
            return Err(CliError::Format(format!("mask entry {e:?} has n >= N = {}", self.n)));
        }
        EdgeMask::new(self.p_k, self.entries.clone()).map_err(|e| CliError::Format(e.to_string()))
    }
}

/// Connection matrices as 0/1 row strings, one list per layer.
pub fn a_to_strings(a: &ConnectionMatrices) -> Vec<Vec<String>> {
    a.layers().iter().map(BinaryMatrix::to_strings).collect()
}

pub fn a_from_strings(shape: &NetworkShape, layers: &[Vec<String>]) -> Result<ConnectionMatrices, CliError> {
    let layers = layers
        .iter()
        .map(|rows| BinaryMatrix::from_strings(rows))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Format(e.to_string()))?;
    ConnectionMatrices::new(shape, layers).map_err(|e| CliError::Format(e.to_string()))
}

/// Model parameters; `gamma[k]` holds the upper triangle with diagonal, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthFile {
    pub format: String,
    pub shape: Vec<usize>,
    pub a: Vec<Vec<String>>,
    pub c: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub nu: Vec<f64>,
}

impl TruthFile {
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            format: FORMAT.into(),
            shape: params.shape().widths().to_vec(),
            a: a_to_strings(&params.a),
            c: params.theta.c.clone(),
            gamma: params.theta.gamma.iter().map(SymMatrix::upper_with_diag).collect(),
            nu: params.theta.nu.clone(),
        }
    }

    pub fn to_params(&self) -> Result<ModelParams, CliError> {
        check_format(&self.format)?;
        let shape = NetworkShape::new(self.shape.clone()).map_err(|e| CliError::Format(e.to_string()))?;
        let a = a_from_strings(&shape, &self.a)?;
        let gamma = self
            .gamma
            .iter()
            .enumerate()
            .map(|(k, upper)| SymMatrix::from_upper_with_diag(shape.width(k), upper))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Format(e.to_string()))?;
        let theta = ContinuousParams {
            nu: self.nu.clone(),
            c: self.c.clone(),
            gamma,
            bounds: None,
        };
        ModelParams::new(a, theta).map_err(|e| CliError::Format(e.to_string()))
    }
}

/// Ground truth of a hierarchical-SBM dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsbmTruthFile {
    pub format: String,
    pub levels: Vec<usize>,
    /// `labels[l][v]`, coarsest level first.
    pub labels: Vec<Vec<usize>>,
    /// Upper triangle of the edge-probability matrix, `i < j`.
    pub probs: Vec<f64>,
}

/// One kept sweep of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceLine {
    pub chain: usize,
    pub sweep: usize,
    pub phase: Phase,
    pub a: Vec<Vec<String>>,
    pub c: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub nu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loglik: Option<Vec<f64>>,
    /// Imputed values at the masked positions, in mask order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imputed: Option<String>,
    /// `latents[n][k]`: upper triangle of `X_k^(n)` for the latent layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latents: Option<Vec<Vec<String>>>,
}

impl TraceLine {
    pub fn from_record(chain: usize, r: &TraceRecord) -> Self {
        Self {
            chain,
            sweep: r.sweep,
            phase: r.phase,
            a: a_to_strings(&r.a),
            c: r.theta.c.clone(),
            gamma: r.theta.gamma.iter().map(SymMatrix::upper_with_diag).collect(),
            nu: r.theta.nu.clone(),
            loglik: r.loglik.clone(),
            imputed: r.imputed.as_deref().map(bits_to_string),
            latents: r.latents.as_ref().map(|per_n| {
                per_n
                    .iter()
                    .map(|layers| layers.iter().map(|x| bits_to_string(&x.upper())).collect())
                    .collect()
            }),
        }
    }

    pub fn imputed_bits(&self) -> Result<Option<Vec<u8>>, CliError> {
        self.imputed.as_deref().map(string_to_bits).transpose()
    }
}

pub fn write_trace(path: &Path, lines: &[TraceLine]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        serde_json::to_writer(&mut out, line).expect("serializable");
        out.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|(idx, line)| {
            let line = line.map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| {
                CliError::Format(format!("{} line {}: {e}", path.display(), idx + 1))
            })
        })
        .collect()
}
