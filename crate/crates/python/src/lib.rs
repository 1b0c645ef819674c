//! Python bindings: model parameters, simulation, the Gibbs sampler and the analysis helpers.
//!
//! Adjacency matrices cross the boundary as nested lists of 0/1 ints, connection matrices as
//! lists of 0/1 row strings per layer. Structured results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use mplex_core::analysis::{self, LoglikMatrix};
use mplex_core::gibbs::{Phase, TraceRecord};
use mplex_core::identifiability::{self, DEFAULT_NODE_CAP};
use mplex_core::{
    polya_gamma, presets, rng, simulate, spectral, Adjacency, BinaryMatrix, ChainTrace,
    ConnectionMatrices, EdgeMask, ModelParams, NetworkShape, SamplerConfig,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serialize through JSON into native Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn to_matrix(x: &Adjacency) -> Vec<Vec<u8>> {
    let p = x.size();
    (0..p).map(|i| (0..p).map(|j| x.get(i, j)).collect()).collect()
}

fn from_matrix(rows: &[Vec<u8>]) -> PyResult<Adjacency> {
    let p = rows.len();
    let mut upper = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(err(format!("row {i} has {} entries, expected {p}", row.len())));
        }
        for j in i + 1..p {
            if row[j] != rows[j][i] {
                return Err(err(format!("matrix is not symmetric at ({i}, {j})")));
            }
            upper.push(row[j]);
        }
    }
    Adjacency::from_upper(p, &upper).map_err(err)
}

fn a_strings(a: &ConnectionMatrices) -> Vec<Vec<String>> {
    a.layers().iter().map(BinaryMatrix::to_strings).collect()
}

fn a_from_strings(layers: &[Vec<String>]) -> PyResult<ConnectionMatrices> {
    let mats = layers
        .iter()
        .map(|rows| BinaryMatrix::from_strings(rows))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let first = mats.first().ok_or_else(|| err("no layers given"))?;
    let mut widths = vec![first.ncols()];
    widths.extend(mats.iter().map(BinaryMatrix::nrows));
    let shape = NetworkShape::new(widths).map_err(err)?;
    ConnectionMatrices::new(&shape, mats).map_err(err)
}

/// Connection matrices and continuous parameters of a model.
#[pyclass(name = "Params", module = "mplex", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: ModelParams,
}

#[pymethods]
impl PyParams {
    /// The (3, 6, 16) simulation truth.
    #[staticmethod]
    fn sim_small() -> Self {
        Self {
            inner: presets::sim_small_truth(),
        }
    }

    /// A two-layer truth with `p0` top nodes and `p1` observed nodes.
    #[staticmethod]
    fn large_p(p0: usize, p1: usize) -> PyResult<Self> {
        Ok(Self {
            inner: presets::large_p_truth(p0, p1).map_err(err)?,
        })
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().widths().to_vec()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<String>> {
        a_strings(&self.inner.a)
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.theta.c.clone()
    }

    /// `gamma[k][i][j]`.
    #[getter]
    fn gamma(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner
            .theta
            .gamma
            .iter()
            .map(|g| {
                let d = g.dim();
                (0..d).map(|i| (0..d).map(|j| g.get(i, j)).collect()).collect()
            })
            .collect()
    }

    #[getter]
    fn nu(&self) -> Vec<f64> {
        self.inner.theta.nu.clone()
    }

    /// `n` observed networks as 0/1 matrices.
    fn simulate(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<Vec<Vec<Vec<u8>>>> {
        let samples = py
            .detach(|| simulate::simulate(&self.inner, n, seed))
            .map_err(err)?;
        Ok(samples.iter().map(|s| to_matrix(s.observed())).collect())
    }

    fn __repr__(&self) -> String {
        format!("Params(shape={:?})", self.inner.shape().widths())
    }
}

/// Sampler settings. Any field of the underlying config can be passed as a keyword.
#[pyclass(name = "SamplerConfig", module = "mplex", skip_from_py_object)]
#[derive(Clone)]
struct PySampler {
    inner: SamplerConfig,
}

#[pymethods]
impl PySampler {
    #[new]
    #[pyo3(signature = (seed, **kwargs))]
    fn new(seed: u64, kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let base = SamplerConfig::new(seed);
        let mut value = serde_json::to_value(&base).map_err(err)?;
        if let Some(kwargs) = kwargs {
            let json = kwargs.py().import("json")?;
            let text: String = json.call_method1("dumps", (kwargs,))?.extract()?;
            let extra: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(&text).map_err(err)?;
            let obj = value.as_object_mut().expect("config is an object");
            for (k, v) in extra {
                obj.insert(k, v);
            }
        }
        let inner: SamplerConfig = serde_json::from_value(value).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("SamplerConfig({})", serde_json::to_string(&self.inner).unwrap_or_default())
    }
}

/// Kept draws of one chain.
#[pyclass(name = "Trace", module = "mplex", frozen)]
struct PyTrace {
    inner: ChainTrace,
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Subsampling => "subsampling",
        Phase::Standard => "standard",
    }
}

#[pymethods]
impl PyTrace {
    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    #[getter]
    fn initial_a(&self) -> Vec<Vec<String>> {
        a_strings(&self.inner.initial_a)
    }

    #[getter]
    fn pg_anomalies(&self) -> u64 {
        self.inner.pg_anomalies
    }

    /// `(sweep, phase)` of every kept draw.
    fn sweeps(&self) -> Vec<(usize, &'static str)> {
        self.inner
            .records
            .iter()
            .map(|r| (r.sweep, phase_name(r.phase)))
            .collect()
    }

    /// Connection matrices of draw `t`.
    fn a(&self, t: usize) -> PyResult<Vec<Vec<String>>> {
        let r = self.inner.records.get(t).ok_or_else(|| err("draw index out of range"))?;
        Ok(a_strings(&r.a))
    }

    /// Scalar parameter traces keyed `c[k]`, `gamma[k][i,j]`, `nu[m]`, after relabeling.
    #[pyo3(signature = (phase=None))]
    fn parameters(&self, py: Python<'_>, phase: Option<&str>) -> PyResult<Py<PyAny>> {
        let records = self.records(phase)?;
        let traces: std::collections::BTreeMap<String, Vec<f64>> =
            analysis::parameter_traces(&records).into_iter().collect();
        to_py(py, &traces)
    }

    /// Posterior means, intervals and the modal `A`, after relabeling.
    #[pyo3(signature = (phase=None))]
    fn summary(&self, py: Python<'_>, phase: Option<&str>) -> PyResult<Py<PyAny>> {
        let records = self.records(phase)?;
        let s = analysis::posterior_summaries(&records).map_err(err)?;
        #[derive(Serialize)]
        struct Out<'a> {
            draws: usize,
            params: &'a [analysis::ParamSummary],
            a_mode: Vec<Vec<String>>,
            a_mode_frequency: f64,
        }
        to_py(
            py,
            &Out {
                draws: s.draws,
                params: &s.params,
                a_mode: a_strings(&s.a_mode),
                a_mode_frequency: s.a_mode_frequency,
            },
        )
    }

    /// WAIC from the per-sample log-likelihoods of the standard phase.
    fn waic(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let l = LoglikMatrix::new(self.inner.loglik_rows()).map_err(err)?;
        to_py(py, &analysis::waic(&l))
    }

    /// Posterior edge probabilities at the masked positions, in mask order.
    fn predict_missing(&self) -> PyResult<Vec<f64>> {
        let mask = EdgeMask::new(self.inner.shape.observed_width(), self.inner.mask.clone())
            .map_err(err)?;
        analysis::predict_missing(&self.inner, &mask).map_err(err)
    }
}

impl PyTrace {
    fn records(&self, phase: Option<&str>) -> PyResult<Vec<TraceRecord>> {
        let relabeled = analysis::relabel(&self.inner);
        let keep: Option<Phase> = match phase {
            None => None,
            Some("standard") => Some(Phase::Standard),
            Some("subsampling") => Some(Phase::Subsampling),
            Some(other) => return Err(err(format!("unknown phase {other:?}"))),
        };
        Ok(relabeled
            .records
            .into_iter()
            .filter(|r| keep.is_none_or(|p| r.phase == p))
            .collect())
    }
}

/// Run one Gibbs chain on observed 0/1 matrices. `mask` lists held-out `(n, i, j)` entries.
#[pyfunction]
#[pyo3(signature = (data, shape, config, mask=None, init_a=None))]
fn fit(
    py: Python<'_>,
    data: Vec<Vec<Vec<u8>>>,
    shape: Vec<usize>,
    config: &PySampler,
    mask: Option<Vec<(usize, usize, usize)>>,
    init_a: Option<Vec<Vec<String>>>,
) -> PyResult<PyTrace> {
    let observed = data
        .iter()
        .map(|m| from_matrix(m))
        .collect::<PyResult<Vec<_>>>()?;
    let shape = NetworkShape::new(shape).map_err(err)?;
    let mask = match mask {
        Some(entries) => EdgeMask::new(shape.observed_width(), entries).map_err(err)?,
        None => EdgeMask::empty(),
    };
    let init = init_a.map(|l| a_from_strings(&l)).transpose()?;
    let cfg = config.inner.clone();
    let trace = py
        .detach(|| mplex_core::run_chain(&observed, &mask, &shape, &cfg, init))
        .map_err(err)?;
    Ok(PyTrace { inner: trace })
}

/// Multilayer Mixed-SCORE initialization of the connection matrices.
#[pyfunction]
#[pyo3(signature = (data, shape, sparsity, seed=0))]
fn spectral_init(
    data: Vec<Vec<Vec<u8>>>,
    shape: Vec<usize>,
    sparsity: usize,
    seed: u64,
) -> PyResult<Vec<Vec<String>>> {
    let observed = data
        .iter()
        .map(|m| from_matrix(m))
        .collect::<PyResult<Vec<_>>>()?;
    let shape = NetworkShape::new(shape).map_err(err)?;
    let init = spectral::multilayer_init(&observed, &shape, sparsity, seed).map_err(err)?;
    Ok(a_strings(&init.a))
}

/// Membership of a square 0/1 matrix (rows as strings) in the M_d class, with a witness.
#[pyfunction]
fn in_class_md(py: Python<'_>, rows: Vec<String>) -> PyResult<Py<PyAny>> {
    let m = BinaryMatrix::from_strings(&rows).map_err(err)?;
    to_py(py, &identifiability::in_class_md(&m).map_err(err)?)
}

/// Exhaustive census of the M_d class, `d <= 5`.
#[pyfunction]
fn md_census(py: Python<'_>, d: usize) -> PyResult<Py<PyAny>> {
    let census = py.detach(|| identifiability::md_census(d)).map_err(err)?;
    to_py(py, &census)
}

/// Strict and generic identifiability of connection matrices under sparsity `s`.
#[pyfunction]
#[pyo3(signature = (a, sparsity, node_cap=DEFAULT_NODE_CAP))]
fn identify(py: Python<'_>, a: Vec<Vec<String>>, sparsity: usize, node_cap: u64) -> PyResult<Py<PyAny>> {
    let a = a_from_strings(&a)?;
    #[derive(Serialize)]
    struct Out {
        strict: bool,
        generic: identifiability::Decision,
        shortcut: bool,
    }
    let out = Out {
        strict: identifiability::in_a1(&a),
        generic: identifiability::in_a2(&a, sparsity, true, node_cap).map_err(err)?,
        shortcut: identifiability::shortcut_applies(&a, sparsity),
    };
    to_py(py, &out)
}

/// `n` draws from PG(1, c).
#[pyfunction]
fn sample_pg(c: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    (0..n).map(|_| polya_gamma::sample_pg1(c, &mut r)).collect()
}

/// `(nmi, accuracy)` of a predicted labeling against the truth.
#[pyfunction]
fn community_metrics(pred: Vec<usize>, truth: Vec<usize>) -> PyResult<(f64, f64)> {
    let m = analysis::community_metrics(&pred, &truth).map_err(err)?;
    Ok((m.nmi, m.accuracy))
}

/// `(observed, labels)` from the 3 -> 9 -> 27 hierarchical block model.
#[pyfunction]
fn hsbm27(py: Python<'_>, n: usize, seed: u64) -> PyResult<(Vec<Vec<Vec<u8>>>, Vec<Vec<usize>>)> {
    let data = py
        .detach(|| simulate::generate_hsbm(&presets::hsbm27_tree(), &presets::HSBM27_RANGES, n, seed))
        .map_err(err)?;
    Ok((data.observed.iter().map(to_matrix).collect(), data.labels))
}

#[pymodule]
fn mplex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PySampler>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_init, m)?)?;
    m.add_function(wrap_pyfunction!(in_class_md, m)?)?;
    m.add_function(wrap_pyfunction!(md_census, m)?)?;
    m.add_function(wrap_pyfunction!(identify, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pg, m)?)?;
    m.add_function(wrap_pyfunction!(community_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(hsbm27, m)?)?;
    Ok(())
}
