use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};
use serde::Serialize;
use serde_json::Value;

use delaystab::criteria::{certify_decay_rate, Criterion};
use delaystab::io::SystemFile;
use delaystab::report::{
    analyze as analyze_file, equilibrium_section, resolve_tolerance, simulate_file, simulation_config,
    AnalysisReport, AnalyzeOptions, RunError,
};
use delaystab::sim::{fit_decay, write_csv};
use delaystab::sweep::{parse_values, sweep as sweep_doc};
use delaystab::{is_m_matrix as classify, solve_equilibrium, Matrix};

create_exception!(delaystab, InputError, PyValueError, "Invalid system file or option.");

fn input_err(e: impl ToString) -> PyErr {
    InputError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn ser_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &value)
}

fn parse_criterion(c: Option<&str>) -> PyResult<Option<Criterion>> {
    c.map(|s| s.parse::<Criterion>().map_err(input_err)).transpose()
}

/// A validated system file.
#[pyclass(name = "System", frozen)]
struct PySystem {
    file: SystemFile,
    text: String,
}

#[pymethods]
impl PySystem {
    /// Builds a system from JSON text or from a dict with the same layout.
    #[new]
    fn new(source: &Bound<'_, PyAny>) -> PyResult<Self> {
        let text: String = match source.cast::<PyString>() {
            Ok(s) => s.to_str()?.to_owned(),
            Err(_) => {
                let json = source.py().import("json")?;
                json.call_method1("dumps", (source,))?.extract()?
            }
        };
        let file = SystemFile::parse(&text).map_err(input_err)?;
        Ok(PySystem { file, text })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        let file = SystemFile::parse(&text).map_err(input_err)?;
        Ok(PySystem { file, text })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.file.spec.kind()
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.file.name.clone()
    }

    #[getter]
    fn sha256(&self) -> String {
        self.file.sha256()
    }

    /// The spec after parameter substitution.
    fn resolved<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        ser_py(py, &self.file.spec)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.file.source)
    }

    fn __repr__(&self) -> String {
        match &self.file.name {
            Some(n) => format!("System(kind={:?}, name={n:?})", self.file.spec.kind()),
            None => format!("System(kind={:?})", self.file.spec.kind()),
        }
    }
}

/// Result of `analyze`.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    report: AnalysisReport,
}

#[pymethods]
impl PyReport {
    /// `"stable_certified"` or `"inconclusive"`.
    #[getter]
    fn status(&self) -> &'static str {
        if self.report.selected.status == delaystab::Status::StableCertified {
            "stable_certified"
        } else {
            "inconclusive"
        }
    }

    #[getter]
    fn stable(&self) -> bool {
        self.report.selected.status == delaystab::Status::StableCertified
    }

    #[getter]
    fn criterion(&self) -> String {
        self.report.selected.criterion.to_string()
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }

    /// Certified decay rate, if any.
    #[getter]
    fn lambda0(&self) -> Option<f64> {
        self.report.decay_certificate.as_ref().map(|c| c.lambda0)
    }

    /// Decay rate fitted to the simulation, if one was run and fitted.
    #[getter]
    fn lambda_hat(&self) -> Option<f64> {
        self.report.simulation.as_ref()?.decay_fit.as_ref().map(|f| f.lambda_hat)
    }

    fn verdict<'py>(&self, py: Python<'py>, criterion: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
        let c = criterion.parse::<Criterion>().map_err(input_err)?;
        self.report.verdict(c).map(|v| ser_py(py, v)).transpose()
    }

    fn summary(&self) -> String {
        self.report.summary()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        ser_py(py, &self.report)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Report(status={:?}, criterion={:?})", self.status(), self.criterion())
    }
}

/// Simulated trajectory on the output grid.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    traj: delaystab::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.traj.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.traj.states.clone()
    }

    #[getter]
    fn final_state(&self) -> Vec<f64> {
        self.traj.final_state().to_vec()
    }

    #[getter]
    fn system_hash(&self) -> String {
        self.traj.meta.system_hash.clone()
    }

    fn __len__(&self) -> usize {
        self.traj.times.len()
    }

    /// Fits `M exp(-lambda t)` to the deviation from `reference`.
    fn fit_decay<'py>(&self, py: Python<'py>, reference: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        let fit = fit_decay(&self.traj, &reference).map_err(|e| PyValueError::new_err(e.to_string()))?;
        ser_py(py, &fit)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_csv(&self.traj, &mut buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

#[pyfunction]
#[pyo3(signature = (system, criterion=None, tol=None, weights=None, simulate=false, t_end=None, step=None))]
fn analyze(
    system: &PySystem,
    criterion: Option<&str>,
    tol: Option<f64>,
    weights: Option<Vec<f64>>,
    simulate: bool,
    t_end: Option<f64>,
    step: Option<f64>,
) -> PyResult<PyReport> {
    let tol = resolve_tolerance(tol).map_err(input_err)?;
    let simulate =
        if simulate { Some(simulation_config(&system.file, t_end, step).map_err(input_err)?) } else { None };
    let opts = AnalyzeOptions { criterion: parse_criterion(criterion)?, tol, weights, simulate };
    let report = analyze_file(&system.file, &opts).map_err(input_err)?;
    Ok(PyReport { report })
}

/// Certified exponential decay rate as a dict, or `None` when the system is
/// not certified stable.
#[pyfunction]
#[pyo3(signature = (system, tol=None))]
fn certify_rate<'py>(py: Python<'py>, system: &PySystem, tol: Option<f64>) -> PyResult<Option<Bound<'py, PyAny>>> {
    let tol = resolve_tolerance(tol).map_err(input_err)?;
    let general = system.file.spec.to_general().map_err(|v| input_err(format!("{v:?}")))?;
    certify_decay_rate(&general, tol).ok().map(|c| ser_py(py, &c)).transpose()
}

/// Existence conditions and fixed point of a BAM-type system.
#[pyfunction]
#[pyo3(signature = (system, tol=None, max_iter=10_000))]
fn equilibrium<'py>(py: Python<'py>, system: &PySystem, tol: Option<f64>, max_iter: usize) -> PyResult<Bound<'py, PyAny>> {
    let tol = resolve_tolerance(tol).map_err(input_err)?;
    let file = &system.file;
    let mut section = equilibrium_section(file, tol)
        .map_err(input_err)?
        .ok_or_else(|| input_err(format!("no equilibrium analysis for kind `{}`", file.spec.kind())))?;
    if let (Some(bam), Some((f, g))) = (file.spec.as_bam(), file.activations()) {
        match solve_equilibrium(&bam, &f, &g, tol, max_iter) {
            Ok(s) => (section.solution, section.error) = (Some(s), None),
            Err(e) => (section.solution, section.error) = (None, Some(e.to_string())),
        }
    }
    ser_py(py, &section)
}

#[pyfunction]
#[pyo3(signature = (system, t_end=None, step=None))]
fn simulate(py: Python<'_>, system: &PySystem, t_end: Option<f64>, step: Option<f64>) -> PyResult<PyTrajectory> {
    let cfg = simulation_config(&system.file, t_end, step).map_err(input_err)?;
    let file = &system.file;
    let traj = py.detach(|| simulate_file(file, &cfg)).map_err(|e| match e {
        RunError::Input(e) => input_err(e),
        RunError::Sim(e) => PyRuntimeError::new_err(e.to_string()),
    })?;
    Ok(PyTrajectory { traj })
}

/// Classifies a square matrix given as a list of rows.
#[pyfunction]
#[pyo3(signature = (rows, tol=None))]
fn is_m_matrix<'py>(py: Python<'py>, rows: Vec<Vec<f64>>, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let tol = resolve_tolerance(tol).map_err(input_err)?;
    let m = Matrix::from_rows(&rows).map_err(|e| PyValueError::new_err(e.to_string()))?;
    ser_py(py, &classify(&m, tol))
}

/// One analysis row per value of the scalar at `param`; `values` is a list
/// or a `"start:stop:step"` string.
#[pyfunction]
#[pyo3(signature = (system, param, values, criterion=None, tol=None))]
fn sweep<'py>(
    py: Python<'py>,
    system: &PySystem,
    param: &str,
    values: &Bound<'py, PyAny>,
    criterion: Option<&str>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let values: Vec<f64> = match values.cast::<PyString>() {
        Ok(s) => parse_values(s.to_str()?).map_err(input_err)?,
        Err(_) => values.extract()?,
    };
    let tol = resolve_tolerance(tol).map_err(input_err)?;
    let opts = AnalyzeOptions { criterion: parse_criterion(criterion)?, tol, ..Default::default() };
    let doc: Value = serde_json::from_str(&system.text).map_err(input_err)?;
    let rows = py.detach(|| sweep_doc(&doc, param, &values, &opts)).map_err(input_err)?;
    ser_py(py, &rows)
}

#[pymodule]
#[pyo3(name = "delaystab")]
fn delaystab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(certify_rate, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(is_m_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
