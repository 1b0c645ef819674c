use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mplex::analysis::{
    auc, feasible_grid, gelman_rubin, geweke, parameter_traces, posterior_summaries,
    relabel_against, select_model, waic, LoglikMatrix, Waic,
};
use mplex::gibbs::{run_chain, ChainTrace, GibbsError, Phase, TraceRecord};
use mplex::identifiability::{
    in_a1, in_a2, in_class_md, layer_in_a1, layer_in_a21, layer_in_a22, layer_in_a23,
    shortcut_applies, Decision, MdReport,
};
use mplex::model::pairs;
use mplex::presets::{hsbm27_tree, large_p_truth, sim_small_truth, HSBM27_RANGES};
use mplex::simulate::{generate_hsbm, simulate};
use mplex::spectral::LayerDiagnostics;
use mplex::{Adjacency, BinaryMatrix, ConnectionMatrices, EdgeMask, NetworkShape};

use crate::config::RunConfig;
use crate::formats::{
    a_to_strings, read_json, read_trace, write_json, write_trace, DatasetFile, HsbmTruthFile,
    MaskFile, TraceLine, TruthFile, FORMAT,
};
use crate::CliError;

fn prepare_output(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.output_dir()?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_json(&dir.join("config.json"), cfg)?;
    Ok(dir)
}

fn load_data(cfg: &RunConfig) -> Result<Vec<Adjacency>, CliError> {
    let path = cfg.require_path(&cfg.data, "data")?;
    read_json::<DatasetFile>(path)?.to_adjacency()
}

fn load_mask(cfg: &RunConfig, n: usize, p: usize) -> Result<EdgeMask, CliError> {
    let Some(path) = cfg.mask.as_deref() else {
        return Ok(EdgeMask::empty());
    };
    let file: MaskFile = read_json(path)?;
    if file.p_k != p || file.n != n {
        return Err(CliError::Format(format!(
            "mask is for p_K = {}, N = {}; data has p_K = {p}, N = {n}",
            file.p_k, file.n
        )));
    }
    file.to_mask()
}

fn gibbs_error(e: GibbsError) -> CliError {
    match e {
        GibbsError::NumericalAbort { .. } => CliError::Numerical(e.to_string()),
        GibbsError::Config(m) => CliError::Usage(m),
        other => CliError::Data(other.to_string()),
    }
}

// ---------------------------------------------------------------- simulate

pub fn simulate_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = cfg.require_seed()?;
    let preset = cfg
        .preset
        .as_deref()
        .ok_or_else(|| CliError::Usage("config needs `preset`".into()))?;
    let dir = prepare_output(cfg)?;
    let (dataset, truth_path) = match preset {
        "sim-small" | "large-p" => {
            let (truth, default_n) = if preset == "sim-small" {
                (sim_small_truth(), 300)
            } else {
                let p1 = cfg.width.unwrap_or(60);
                (large_p_truth(4, p1).map_err(|e| CliError::Usage(e.to_string()))?, 10)
            };
            let n = cfg.samples.unwrap_or(default_n);
            let samples = simulate(&truth, n, seed).map_err(|e| CliError::Data(e.to_string()))?;
            let observed: Vec<Adjacency> = samples.iter().map(|s| s.observed().clone()).collect();
            let path = dir.join("truth.json");
            write_json(&path, &TruthFile::from_params(&truth))?;
            (DatasetFile::from_adjacency(truth.shape().observed_width(), &observed), path)
        }
        "hsbm27" => {
            let tree = hsbm27_tree();
            let n = cfg.samples.unwrap_or(50);
            let data = generate_hsbm(&tree, &HSBM27_RANGES, n, seed)
                .map_err(|e| CliError::Data(e.to_string()))?;
            let p = tree.nodes();
            let truth = HsbmTruthFile {
                format: FORMAT.into(),
                levels: vec![3, 9, 27],
                labels: data.labels.clone(),
                probs: pairs(p).map(|(i, j)| data.probs.get(i, j)).collect(),
            };
            let path = dir.join("truth.json");
            write_json(&path, &truth)?;
            (DatasetFile::from_adjacency(p, &data.observed), path)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset {other:?}; expected sim-small, hsbm27 or large-p"
            )))
        }
    };
    write_json(&dir.join("data.json"), &dataset)?;
    let mask_path = match cfg.holdout {
        Some(fraction) => {
            let mask = holdout_mask(dataset.p_k, dataset.n, fraction, seed)?;
            let path = dir.join("mask.json");
            write_json(&path, &MaskFile::from_mask(dataset.p_k, dataset.n, &mask))?;
            Some(path)
        }
        None => None,
    };
    println!(
        "{}",
        serde_json::json!({
            "data": dir.join("data.json"),
            "truth": truth_path,
            "mask": mask_path,
            "N": dataset.n,
            "p_K": dataset.p_k,
        })
    );
    Ok(())
}

/// Each `(n, i, j)` entry is held out independently with probability `fraction`.
fn holdout_mask(p: usize, n: usize, fraction: f64, seed: u64) -> Result<EdgeMask, CliError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CliError::Usage(format!("holdout must lie in [0, 1], got {fraction}")));
    }
    // Separate stream from the simulation itself.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x6d61736b);
    let entries = (0..n)
        .flat_map(|s| pairs(p).map(move |(i, j)| (s, i, j)))
        .filter(|_| rng.random::<f64>() < fraction)
        .collect();
    EdgeMask::new(p, entries).map_err(|e| CliError::Data(e.to_string()))
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Serialize)]
struct ParamReport {
    name: String,
    mean: f64,
    sd: f64,
    q025: f64,
    q50: f64,
    q975: f64,
    /// Across chains; absent with a single chain.
    rhat: Option<f64>,
    /// First chain only.
    geweke: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FitSummary {
    shape: Vec<usize>,
    chains: usize,
    /// Phase the posterior summaries are computed from.
    summarized_phase: Phase,
    draws: usize,
    params: Vec<ParamReport>,
    a_mode: Vec<Vec<String>>,
    a_mode_frequency: f64,
    initial_a: Vec<Vec<Vec<String>>>,
    init_diagnostics: Vec<Vec<LayerDiagnostics>>,
    waic: Option<Waic>,
    pg_anomalies: u64,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn summarize_fit(shape: &NetworkShape, traces: &[ChainTrace]) -> Result<FitSummary, CliError> {
    let reference = traces
        .iter()
        .find_map(|t| t.records.first())
        .map(|r| r.a.clone())
        .ok_or_else(|| CliError::Usage("no kept draws; check burn_in and the schedule".into()))?;
    let relabeled: Vec<ChainTrace> = traces
        .iter()
        .map(|t| relabel_against(t, &reference).0)
        .collect();
    let has_standard = relabeled
        .iter()
        .any(|t| t.phase_records(Phase::Standard).next().is_some());
    let phase = if has_standard {
        Phase::Standard
    } else {
        Phase::Subsampling
    };
    let per_chain: Vec<Vec<TraceRecord>> = relabeled
        .iter()
        .map(|t| t.phase_records(phase).cloned().collect())
        .collect();
    let pooled: Vec<TraceRecord> = per_chain.iter().flatten().cloned().collect();
    let summary = posterior_summaries(&pooled).map_err(|e| CliError::Data(e.to_string()))?;
    let chain_traces: Vec<Vec<(String, Vec<f64>)>> =
        per_chain.iter().map(|r| parameter_traces(r)).collect();
    let params = summary
        .params
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let series: Vec<Vec<f64>> = chain_traces
                .iter()
                .filter(|c| !c.is_empty())
                .map(|c| c[idx].1.clone())
                .collect();
            let rhat = (series.len() >= 2)
                .then(|| gelman_rubin(&series).ok())
                .flatten()
                .and_then(|d| finite(d.value));
            let geweke = series
                .first()
                .and_then(|s| geweke(s, 0.1, 0.5).ok())
                .and_then(|d| finite(d.value));
            ParamReport {
                name: p.name.clone(),
                mean: p.mean,
                sd: p.sd,
                q025: p.q025,
                q50: p.q50,
                q975: p.q975,
                rhat,
                geweke,
            }
        })
        .collect();
    let waic = traces
        .first()
        .map(|t| t.loglik_rows())
        .filter(|rows| !rows.is_empty())
        .and_then(|rows| LoglikMatrix::new(rows).ok())
        .map(|l| waic(&l));
    Ok(FitSummary {
        shape: shape.widths().to_vec(),
        chains: traces.len(),
        summarized_phase: phase,
        draws: pooled.len(),
        params,
        a_mode: a_to_strings(&summary.a_mode),
        a_mode_frequency: summary.a_mode_frequency,
        initial_a: traces.iter().map(|t| a_to_strings(&t.initial_a)).collect(),
        init_diagnostics: traces.iter().map(|t| t.init_diagnostics.clone()).collect(),
        waic,
        pg_anomalies: traces.iter().map(|t| t.pg_anomalies).sum(),
    })
}

pub fn fit_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let sampler = cfg.sampler()?;
    let data = load_data(cfg)?;
    let truth = match cfg.truth.as_deref() {
        Some(path) => Some(read_json::<TruthFile>(path)?.to_params()?),
        None => None,
    };
    let widths = match (&cfg.shape, &truth) {
        (Some(w), _) => w.clone(),
        (None, Some(t)) => t.shape().widths().to_vec(),
        (None, None) => return Err(CliError::Usage("config needs `shape`".into())),
    };
    let shape = NetworkShape::new(widths).map_err(|e| CliError::Usage(e.to_string()))?;
    let init = if cfg.init_from_truth {
        let t = truth
            .as_ref()
            .ok_or_else(|| CliError::Usage("init_from_truth needs `truth`".into()))?;
        Some(t.a.clone())
    } else {
        None
    };
    let p = data.first().map_or(shape.observed_width(), Adjacency::size);
    let mask = load_mask(cfg, data.len(), p)?;
    let dir = prepare_output(cfg)?;

    let start = Instant::now();
    let traces: Vec<ChainTrace> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut chain_cfg = sampler.clone();
            chain_cfg.seed = sampler.seed.wrapping_add(c as u64);
            run_chain(&data, &mask, &shape, &chain_cfg, init.clone())
        })
        .collect::<Result<_, _>>()
        .map_err(gibbs_error)?;
    let lines: Vec<TraceLine> = traces
        .iter()
        .enumerate()
        .flat_map(|(c, t)| t.records.iter().map(move |r| TraceLine::from_record(c, r)))
        .collect();
    write_trace(&dir.join("trace.ndjson"), &lines)?;
    let summary = summarize_fit(&shape, &traces)?;
    write_json(&dir.join("summary.json"), &summary)?;
    eprintln!(
        "fit: {} chain(s), {} kept draws, {:.1}s",
        traces.len(),
        lines.len(),
        start.elapsed().as_secs_f64()
    );
    println!(
        "{}",
        serde_json::json!({
            "trace": dir.join("trace.ndjson"),
            "summary": dir.join("summary.json"),
            "a_mode": summary.a_mode,
        })
    );
    Ok(())
}

// ---------------------------------------------------------------- select

#[derive(Debug, Serialize)]
struct SelectionReport {
    cells: Vec<mplex::analysis::GridCell>,
    best: Option<Vec<usize>>,
}

pub fn select_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let sampler = cfg.sampler()?;
    let data = load_data(cfg)?;
    let p = data
        .first()
        .map(Adjacency::size)
        .ok_or_else(|| CliError::Data("dataset has no samples".into()))?;
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Usage("config needs `grid`".into()))?;
    let mask = load_mask(cfg, data.len(), p)?;
    let dir = prepare_output(cfg)?;
    let shapes = feasible_grid(grid, p);
    if shapes.is_empty() {
        eprintln!("warning: no grid cell satisfies p_k >= 2 p_(k-1); the table is empty");
    }
    let sel = select_model(&data, &mask, &shapes, &sampler);
    for cell in sel.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!("warning: cell {:?} failed: {}", cell.widths, cell.error.as_deref().unwrap_or(""));
    }
    let report = SelectionReport {
        best: sel.best_cell().map(|c| c.widths.clone()),
        cells: sel.cells,
    };
    write_json(&dir.join("selection.json"), &report)?;
    println!("{}", serde_json::json!({ "best": report.best, "cells": report.cells.len() }));
    Ok(())
}

// ---------------------------------------------------------------- identify

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareFile {
    matrix: Vec<String>,
}

/// Connection matrices as `a`; any other fields (a truth file's parameters) are ignored.
#[derive(Debug, Deserialize)]
struct LayersFile {
    a: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
struct LayerReport {
    layer: usize,
    rows: usize,
    cols: usize,
    a1: bool,
    a21: Decision,
    a22: bool,
    a23: bool,
}

#[derive(Debug, Serialize)]
struct ConnectionReport {
    shape: Vec<usize>,
    sparsity: usize,
    layers: Vec<LayerReport>,
    strict: bool,
    /// Membership in the generic space, through the shortcut when it applies.
    generic: Decision,
    shortcut: bool,
}

fn connection_from_layers(layers: &[Vec<String>]) -> Result<ConnectionMatrices, CliError> {
    let mats = layers
        .iter()
        .map(|rows| BinaryMatrix::from_strings(rows))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Format(e.to_string()))?;
    let first = mats
        .first()
        .ok_or_else(|| CliError::Format("no layers in `a`".into()))?;
    let mut widths = vec![first.ncols()];
    widths.extend(mats.iter().map(BinaryMatrix::nrows));
    let shape = NetworkShape::new(widths).map_err(|e| CliError::Format(e.to_string()))?;
    ConnectionMatrices::new(&shape, mats).map_err(|e| CliError::Format(e.to_string()))
}

pub fn identify_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.require_path(&cfg.matrix, "matrix")?;
    let value: serde_json::Value = read_json(path)?;
    let report = if value.get("matrix").is_some() {
        let file: SquareFile =
            serde_json::from_value(value).map_err(|e| CliError::Format(e.to_string()))?;
        let m = BinaryMatrix::from_strings(&file.matrix).map_err(|e| CliError::Format(e.to_string()))?;
        let report: MdReport = in_class_md(&m).map_err(|e| CliError::Format(e.to_string()))?;
        serde_json::to_value(report).expect("serializable")
    } else {
        let file: LayersFile =
            serde_json::from_value(value).map_err(|e| CliError::Format(e.to_string()))?;
        let a = connection_from_layers(&file.a)?;
        let ident = |e: mplex::identifiability::IdentError| CliError::Format(e.to_string());
        let layers = a
            .layers()
            .iter()
            .enumerate()
            .map(|(k, m)| {
                Ok(LayerReport {
                    layer: k + 1,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    a1: layer_in_a1(m),
                    a21: layer_in_a21(m, cfg.node_cap).map_err(ident)?,
                    a22: layer_in_a22(m),
                    a23: layer_in_a23(m),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let report = ConnectionReport {
            shape: a.shape().widths().to_vec(),
            sparsity: cfg.sparsity,
            layers,
            strict: in_a1(&a),
            generic: in_a2(&a, cfg.sparsity, true, cfg.node_cap).map_err(ident)?,
            shortcut: shortcut_applies(&a, cfg.sparsity),
        };
        serde_json::to_value(report).expect("serializable")
    };
    if let Some(dir) = cfg.output.as_deref() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_json(&dir.join("identify.json"), &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(())
}

// ---------------------------------------------------------------- predict

#[derive(Debug, Serialize)]
struct Prediction {
    n: usize,
    i: usize,
    j: usize,
    probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<u8>,
}

#[derive(Debug, Serialize)]
struct PredictionReport {
    draws: usize,
    predictions: Vec<Prediction>,
    auc: Option<f64>,
}

pub fn predict_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let trace = read_trace(cfg.require_path(&cfg.trace, "trace")?)?;
    let mask_path = cfg.require_path(&cfg.mask, "mask")?;
    let mask = read_json::<MaskFile>(mask_path)?.to_mask()?;
    let truth = match cfg.data.as_deref() {
        Some(path) => Some(read_json::<DatasetFile>(path)?.to_adjacency()?),
        None => None,
    };
    let mut sums = vec![0.0; mask.len()];
    let mut draws = 0;
    if !mask.is_empty() {
        for (idx, line) in trace.iter().enumerate() {
            let bits = line.imputed_bits()?.ok_or_else(|| {
                CliError::Format(format!("trace record {idx} has no imputed values"))
            })?;
            if bits.len() != mask.len() {
                return Err(CliError::Format(format!(
                    "trace record {idx} has {} imputed values, the mask has {}",
                    bits.len(),
                    mask.len()
                )));
            }
            for (s, b) in sums.iter_mut().zip(bits) {
                *s += b as f64;
            }
            draws += 1;
        }
        if draws == 0 {
            return Err(CliError::Format("trace has no records".into()));
        }
    }
    let predictions: Vec<Prediction> = mask
        .entries()
        .iter()
        .zip(&sums)
        .map(|(&(n, i, j), &s)| {
            let value = match &truth {
                Some(data) => Some(
                    data.get(n)
                        .map(|x| x.get(i, j))
                        .ok_or_else(|| CliError::Format(format!("data has no sample {n}")))?,
                ),
                None => None,
            };
            Ok(Prediction {
                n,
                i,
                j,
                probability: s / draws.max(1) as f64,
                truth: value,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let auc = if truth.is_some() {
        let labels: Vec<bool> = predictions.iter().map(|p| p.truth == Some(1)).collect();
        let scores: Vec<f64> = predictions.iter().map(|p| p.probability).collect();
        auc(&labels, &scores).map_err(|e| CliError::Data(e.to_string()))?
    } else {
        None
    };
    let report = PredictionReport {
        draws,
        predictions,
        auc,
    };
    if let Some(dir) = cfg.output.as_deref() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_json(&dir.join("config.json"), cfg)?;
        write_json(&dir.join("predictions.json"), &report)?;
    }
    println!(
        "{}",
        serde_json::json!({ "entries": report.predictions.len(), "draws": draws, "auc": report.auc })
    );
    Ok(())
}
