//! Python module `lowwafom`.
//!
//! Validation failures raise `ValueError`, file-system failures `OSError`.
//! Long computations release the GIL.

use std::collections::BTreeMap;

use lowwafom as core;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: core::Error) -> PyErr {
    match err {
        core::Error::Io { .. } => PyOSError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn matrix_from_rows(rows: &[Vec<u8>]) -> PyResult<core::Gf2Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    if rows.iter().flatten().any(|&b| b > 1) {
        return Err(PyValueError::new_err("matrix entries must be 0 or 1"));
    }
    Ok(core::Gf2Matrix::from_fn(rows.len(), cols, |r, c| rows[r][c] == 1))
}

fn matrix_rows(m: &core::Gf2Matrix) -> Vec<Vec<u8>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| u8::from(m.get(r, c))).collect())
        .collect()
}

/// A digital net over GF(2) given by s generating matrices of shape n x m.
#[pyclass(name = "DigitalNet", module = "lowwafom", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyDigitalNet(core::DigitalNet);

#[pymethods]
impl PyDigitalNet {
    /// `matrices[i][r][c]` is row r, column c of C_i (entries 0/1).
    #[new]
    fn new(matrices: Vec<Vec<Vec<u8>>>) -> PyResult<Self> {
        let gen = matrices
            .iter()
            .map(|m| matrix_from_rows(m))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self(core::DigitalNet::new(gen).py_err()?))
    }

    /// Sobol' net from the bundled direction numbers or a table file.
    #[staticmethod]
    #[pyo3(signature = (s, m, n = 32, dirs_path = None))]
    fn sobol(s: usize, m: usize, n: usize, dirs_path: Option<std::path::PathBuf>) -> PyResult<Self> {
        let dirs = match dirs_path {
            Some(p) => core::load_direction_numbers(p).py_err()?,
            None => core::bundled_direction_numbers(),
        };
        Ok(Self(core::build_sobol(&dirs, s, m, n).py_err()?))
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self(core::DigitalNet::load(path).py_err()?))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self(core::DigitalNet::from_text(text, "<string>".as_ref()).py_err()?))
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.0.save(path).py_err()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn s(&self) -> usize {
        self.0.s()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn num_points(&self) -> u64 {
        self.0.num_points()
    }

    fn matrices(&self) -> Vec<Vec<Vec<u8>>> {
        self.0.matrices().iter().map(matrix_rows).collect()
    }

    /// Shifted real coordinates of point h.
    fn point(&self, h: u64) -> PyResult<Vec<f64>> {
        Ok(self.0.point(h).py_err()?.to_real())
    }

    /// The first `count` points (all by default) in index order.
    #[pyo3(signature = (count = None))]
    fn points(&self, py: Python<'_>, count: Option<u64>) -> PyResult<Vec<Vec<f64>>> {
        let count = count.unwrap_or(self.0.num_points());
        if count > self.0.num_points() {
            return Err(PyValueError::new_err(format!("count {count} exceeds {} points", self.0.num_points())));
        }
        py.detach(|| (0..count).map(|h| Ok(self.0.point(h)?.to_real())).collect::<core::Result<_>>())
            .py_err()
    }

    fn truncate(&self, m: usize) -> PyResult<Self> {
        Ok(Self(self.0.truncate(m).py_err()?))
    }

    fn scramble(&self, l: &PyScrambleSet) -> PyResult<Self> {
        Ok(Self(self.0.scramble(&l.0).py_err()?))
    }

    /// Interlaces groups of `alpha` consecutive generating matrices.
    fn interlace(&self, alpha: usize) -> PyResult<Self> {
        let mats = core::interlace(self.0.matrices(), alpha).py_err()?;
        Ok(Self(core::DigitalNet::new(mats).py_err()?))
    }

    fn __repr__(&self) -> String {
        format!("DigitalNet(s={}, m={}, n={})", self.0.s(), self.0.m(), self.0.n())
    }
}

/// Unit lower-triangular matrices L_1..L_s applied as C_i -> L_i C_i.
#[pyclass(name = "ScrambleSet", module = "lowwafom", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyScrambleSet(core::ScrambleSet);

#[pymethods]
impl PyScrambleSet {
    #[new]
    fn new(matrices: Vec<Vec<Vec<u8>>>) -> PyResult<Self> {
        let mats = matrices
            .iter()
            .map(|m| matrix_from_rows(m))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self(core::ScrambleSet::new(mats).py_err()?))
    }

    #[staticmethod]
    fn identity(s: usize, n: usize) -> Self {
        Self(core::ScrambleSet::identity(s, n))
    }

    /// The scramble set the search draws as candidate `index` for `seed`.
    #[staticmethod]
    #[pyo3(signature = (s, n, seed, index = 1))]
    fn random(s: usize, n: usize, seed: u64, index: u64) -> Self {
        Self(core::search::candidate_scramble(s, n, seed, index))
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self(core::ScrambleSet::load(path).py_err()?))
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.0.save(path).py_err()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn matrices(&self) -> Vec<Vec<Vec<u8>>> {
        (0..self.0.s()).map(|i| matrix_rows(self.0.matrix(i))).collect()
    }

    fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    fn __repr__(&self) -> String {
        format!("ScrambleSet(s={}, n={})", self.0.s(), self.0.n())
    }
}

#[pyfunction]
fn t_value(py: Python<'_>, net: &PyDigitalNet) -> PyResult<usize> {
    py.detach(|| core::t_value(&net.0)).py_err()
}

#[pyfunction]
#[pyo3(signature = (net, q = 2))]
fn wafom(py: Python<'_>, net: &PyDigitalNet, q: u32) -> PyResult<f64> {
    py.detach(|| core::wafom(&net.0, q)).py_err()
}

#[pyfunction]
#[pyo3(signature = (net, q = 2))]
fn wafom_fast(py: Python<'_>, net: &PyDigitalNet, q: u32) -> PyResult<f64> {
    py.detach(|| core::wafom_fast(&net.0, q)).py_err()
}

#[pyfunction]
#[pyo3(signature = (net, q = 2))]
fn wafom_dual_oracle(py: Python<'_>, net: &PyDigitalNet, q: u32) -> PyResult<f64> {
    py.detach(|| core::wafom_dual_oracle(&net.0, q)).py_err()
}

/// Dict with keys t, wafom, q, s, m, n.
#[pyfunction]
#[pyo3(signature = (net, q = 2))]
fn quality_report<'py>(py: Python<'py>, net: &PyDigitalNet, q: u32) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| core::quality_report(&net.0, q)).py_err()?;
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("wafom", r.wafom)?;
    d.set_item("q", r.q)?;
    d.set_item("s", r.s)?;
    d.set_item("m", r.m)?;
    d.set_item("n", r.n)?;
    Ok(d)
}

/// Best of `candidates` random scramblings. Returns a dict with best_net,
/// best_scramble, best_wafom, candidate_index and trace [(index, wafom)].
#[pyfunction]
#[pyo3(signature = (net, candidates = 1000, seed = 0, q = 2, include_identity = true, objective = "minimize"))]
fn scramble_search<'py>(
    py: Python<'py>,
    net: &PyDigitalNet,
    candidates: u64,
    seed: u64,
    q: u32,
    include_identity: bool,
    objective: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = core::SearchConfig {
        candidates,
        seed,
        q,
        include_identity,
        objective: objective.parse().py_err()?,
    };
    let r = py.detach(|| core::scramble_search(&net.0, &cfg)).py_err()?;
    let d = PyDict::new(py);
    d.set_item("best_net", PyDigitalNet(r.best_net))?;
    d.set_item("best_scramble", PyScrambleSet(r.best_scramble))?;
    d.set_item("best_wafom", r.best_wafom)?;
    d.set_item("candidate_index", r.candidate_index)?;
    let trace: Vec<(u64, f64)> = r.trace.iter().map(|e| (e.index, e.wafom)).collect();
    d.set_item("trace", trace)?;
    Ok(d)
}

/// Nets for m = 1..=m_max grown one WAFOM-chosen column at a time.
#[pyfunction]
#[pyo3(signature = (s, n, m_max, candidates_per_column, seed = 0, q = 2))]
fn naive_column_search(
    py: Python<'_>,
    s: usize,
    n: usize,
    m_max: usize,
    candidates_per_column: usize,
    seed: u64,
    q: u32,
) -> PyResult<Vec<PyDigitalNet>> {
    let nets = py
        .detach(|| core::naive_column_search(s, n, m_max, candidates_per_column, seed, q))
        .py_err()?;
    Ok(nets.into_iter().map(PyDigitalNet).collect())
}

/// Genz family `family` (1..6) at point x.
#[pyfunction]
fn genz_eval(family: usize, a: Vec<f64>, u: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    let f = core::genz::Family::from_index(family).py_err()?;
    if a.len() != u.len() || a.len() != x.len() {
        return Err(PyValueError::new_err("a, u and x must have the same length"));
    }
    Ok(core::genz::genz_eval(f, &a, &u, &x))
}

#[pyfunction]
fn genz_exact(family: usize, a: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
    let f = core::genz::Family::from_index(family).py_err()?;
    if a.len() != u.len() {
        return Err(PyValueError::new_err("a and u must have the same length"));
    }
    core::genz::genz_exact(f, &a, &u).py_err()
}

/// `nets` maps a label to nets over a range of m. Returns one dict per
/// (label, family, m) with the median log10 relative error.
#[pyfunction]
#[pyo3(signature = (nets, s, families = vec![1, 2, 3, 4, 5, 6], samples = 20, seed = 0))]
fn run_bench<'py>(
    py: Python<'py>,
    nets: BTreeMap<String, Vec<PyDigitalNet>>,
    s: usize,
    families: Vec<usize>,
    samples: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let families = families
        .into_iter()
        .map(core::genz::Family::from_index)
        .collect::<core::Result<Vec<_>>>()
        .py_err()?;
    let nets: Vec<core::genz::NetFamily> = nets
        .into_iter()
        .map(|(label, list)| core::genz::NetFamily {
            label,
            nets: list.into_iter().map(|n| n.0).collect(),
        })
        .collect();
    let rows = py
        .detach(|| core::genz::run_bench(&nets, &families, s, samples, seed))
        .py_err()?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("net", &r.label)?;
            d.set_item("family", r.family)?;
            d.set_item("s", r.s)?;
            d.set_item("m", r.m)?;
            d.set_item("N", r.points)?;
            d.set_item("median_log10_rel_err", r.median_log10_rel_err)?;
            d.set_item("samples", r.samples)?;
            d.set_item("seed", r.seed)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "lowwafom")]
fn lowwafom_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDigitalNet>()?;
    m.add_class::<PyScrambleSet>()?;
    m.add_function(wrap_pyfunction!(t_value, m)?)?;
    m.add_function(wrap_pyfunction!(wafom, m)?)?;
    m.add_function(wrap_pyfunction!(wafom_fast, m)?)?;
    m.add_function(wrap_pyfunction!(wafom_dual_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(quality_report, m)?)?;
    m.add_function(wrap_pyfunction!(scramble_search, m)?)?;
    m.add_function(wrap_pyfunction!(naive_column_search, m)?)?;
    m.add_function(wrap_pyfunction!(genz_eval, m)?)?;
    m.add_function(wrap_pyfunction!(genz_exact, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
