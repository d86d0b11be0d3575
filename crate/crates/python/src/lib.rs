//! Python bindings for the virtual gap engine.
//!
//! Reports and snapshots are handed over as plain `dict`/`list` values, decoded
//! from the same JSON the CLI and service emit.

use std::collections::BTreeSet;

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use vga_core::dataset::{example_dataset, load_path};
use vga_core::report::{to_json_string, to_rounded_value};
use vga_core::sbm::{compare_sbm_vga, solve_sbm};
use vga_core::{assess, AssessmentReport, Phase4Session, ProgramKind, VgaError};

fn to_py_err(e: VgaError) -> PyErr {
    match e {
        VgaError::UnknownDmu(_) => PyKeyError::new_err(e.to_string()),
        e if e.is_validation() || e.is_rejection() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let json = PyModule::import(py, "json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

fn program_kind(program: &str, kappa: Option<f64>) -> PyResult<ProgramKind> {
    match (program.to_ascii_lowercase().as_str(), kappa) {
        ("pte", _) => Ok(ProgramKind::Pte),
        ("ste", Some(k)) => ProgramKind::ste(k).map_err(to_py_err),
        ("ste", None) => Err(PyValueError::new_err("program `ste` requires kappa")),
        (other, _) => Err(PyValueError::new_err(format!("unknown program `{other}`"))),
    }
}

/// A validated input/output table.
#[pyclass(name = "Dataset", module = "vga", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: vga_core::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Parses CSV or JSON text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        vga_core::Dataset::parse(text).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        vga_core::Dataset::from_csv_reader(text.as_bytes())
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        vga_core::Dataset::from_json_str(text).map(|inner| Self { inner }).map_err(to_py_err)
    }

    /// Loads a `.csv` or `.json` file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        load_path(path).map(|inner| Self { inner }).map_err(to_py_err)
    }

    /// The bundled six-unit example.
    #[staticmethod]
    fn example() -> Self {
        Self { inner: example_dataset() }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s()
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.ids().map(str::to_string).collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.to_csv_writer(&mut buf).map_err(to_py_err)?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, m={}, s={})", self.inner.n(), self.inner.m(), self.inner.s())
    }
}

/// Full assessment report of one unit as a dict.
#[pyfunction]
#[pyo3(signature = (dataset, dmu, program = "pte", kappa = None))]
fn assess_report(py: Python<'_>, dataset: &PyDataset, dmu: &str, program: &str, kappa: Option<f64>) -> PyResult<Py<PyAny>> {
    let kind = program_kind(program, kappa)?;
    let a = assess(&dataset.inner, dmu, kind).map_err(to_py_err)?;
    let text = AssessmentReport::build(&dataset.inner, &a).to_json_string().map_err(to_py_err)?;
    json_to_py(py, &text)
}

/// Efficiency score of one unit.
#[pyfunction]
#[pyo3(signature = (dataset, dmu, program = "pte", kappa = None))]
fn efficiency(dataset: &PyDataset, dmu: &str, program: &str, kappa: Option<f64>) -> PyResult<f64> {
    let kind = program_kind(program, kappa)?;
    assess(&dataset.inner, dmu, kind).map(|a| a.efficiency).map_err(to_py_err)
}

/// SBM solution next to the PTE score, with incompleteness flags.
#[pyfunction]
fn sbm_compare(py: Python<'_>, dataset: &PyDataset, dmu: &str) -> PyResult<Py<PyAny>> {
    let cmp = compare_sbm_vga(&dataset.inner, dmu).map_err(to_py_err)?;
    let detail = solve_sbm(&dataset.inner, dmu).map_err(to_py_err)?;
    let value = to_rounded_value(&(cmp, detail)).map_err(to_py_err)?;
    let text = to_json_string(&value).map_err(to_py_err)?;
    json_to_py(py, &text)
}

/// An interactive scalar-selection session for one unit.
#[pyclass(name = "Session", module = "vga")]
struct PySession {
    inner: Phase4Session,
}

#[pymethods]
impl PySession {
    #[new]
    fn new(dataset: &PyDataset, dmu: &str) -> PyResult<Self> {
        Phase4Session::start(&dataset.inner, dmu).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[getter]
    fn kappa1(&self) -> f64 {
        self.inner.kappa1
    }

    #[getter]
    fn kappa2(&self) -> f64 {
        self.inner.kappa2()
    }

    /// `(min, max)` of the admissible scalar range.
    #[getter]
    fn interval(&self) -> (f64, f64) {
        let i = self.inner.interval();
        (i.min, i.max)
    }

    #[getter]
    fn peers(&self) -> Vec<String> {
        self.inner.peers().into_iter().collect()
    }

    #[getter]
    fn finalized(&self) -> bool {
        self.inner.is_finalized()
    }

    #[getter]
    fn rounds(&self) -> usize {
        self.inner.rounds()
    }

    /// Efficiency at a trial scalar. Raises `ValueError` outside the interval.
    fn what_if(&mut self, kappa: f64) -> PyResult<f64> {
        self.inner.what_if(kappa).map(|a| a.efficiency).map_err(to_py_err)
    }

    fn finalize(&mut self, kappa: f64) -> PyResult<f64> {
        self.inner.finalize(kappa).map(|a| a.efficiency).map_err(to_py_err)
    }

    /// New session on the table without the given peers.
    fn exclude(&self, ids: Vec<String>) -> PyResult<Self> {
        let ids: BTreeSet<String> = ids.into_iter().collect();
        self.inner.exclude_and_rerun(&ids).map(|inner| Self { inner }).map_err(to_py_err)
    }

    fn snapshot(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let value = self.inner.snapshot().map_err(to_py_err)?;
        let text = to_json_string(&value).map_err(to_py_err)?;
        json_to_py(py, &text)
    }
}

#[pymodule]
fn vga(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PySession>()?;
    m.add_function(wrap_pyfunction!(assess_report, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(sbm_compare, m)?)?;
    Ok(())
}
