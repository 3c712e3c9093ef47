//! Python bindings: Young functions, weighted measures, piecewise functions,
//! the norms, the constants and the inequality checks.
//!
//! Reports come back as plain dicts with the same keys as the CLI JSON,
//! except that non-finite numbers are Python floats.

use orlicz_core::config::ConfigFile;
use orlicz_core::constants::{k1_phi, kp_pair};
use orlicz_core::function::{PiecewiseBilinear2D, PiecewiseLinear1D};
use orlicz_core::measure::{Anchor, Density, WeightedMeasure1D};
use orlicz_core::norms::{self, ProductMeasure};
use orlicz_core::report::{kconstant_json, verification_json};
use orlicz_core::verify::{self, ExperimentConfig, VerificationReport};
use orlicz_core::young;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

create_exception!(orlicz_lab, OrliczError, PyValueError, "Invalid input or failed numerical routine.");

fn err(e: impl std::fmt::Display) -> PyErr {
    OrliczError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => match s.as_str() {
            "inf" => f64::INFINITY.into_pyobject(py)?.into_any(),
            "-inf" => f64::NEG_INFINITY.into_pyobject(py)?.into_any(),
            "nan" => f64::NAN.into_pyobject(py)?.into_any(),
            _ => s.into_pyobject(py)?.into_any(),
        },
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn reports<'py>(py: Python<'py>, rs: &[VerificationReport]) -> PyResult<Bound<'py, PyList>> {
    let list = PyList::empty(py);
    for r in rs {
        list.append(to_py(py, &verification_json(r))?)?;
    }
    Ok(list)
}

#[pyclass(name = "YoungFunction", module = "orlicz_lab", frozen)]
pub struct PyYoung(young::YoungFunction);

#[pymethods]
impl PyYoung {
    /// `t^q`, `q ≥ 1`.
    #[staticmethod]
    fn power(q: f64) -> PyResult<Self> {
        young::YoungFunction::power(q).map(Self).map_err(err)
    }

    /// `exp(t^q) − 1`.
    #[staticmethod]
    fn exp_power(q: f64) -> PyResult<Self> {
        young::YoungFunction::exp_power(q).map(Self).map_err(err)
    }

    /// Piecewise-linear through `(t, Φ(t))` pairs starting at `(0, 0)`.
    #[staticmethod]
    fn tabulated(knots: Vec<(f64, f64)>) -> PyResult<Self> {
        young::YoungFunction::tabulated(&knots).map(Self).map_err(err)
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).map_err(err)
    }

    fn inverse(&self, y: f64) -> PyResult<f64> {
        self.0.inverse(y).map_err(err)
    }

    /// `2 / Φ⁻¹(1/2)`.
    fn c0(&self) -> PyResult<f64> {
        self.0.c0().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("YoungFunction({:?})", self.0.kind())
    }
}

#[pyclass(name = "Measure", module = "orlicz_lab", frozen)]
pub struct PyMeasure(WeightedMeasure1D);

#[pymethods]
impl PyMeasure {
    #[staticmethod]
    #[pyo3(signature = (a, b, c = 1.0))]
    fn constant(a: f64, b: f64, c: f64) -> PyResult<Self> {
        WeightedMeasure1D::new(a, b, Density::Constant(c)).map(Self).map_err(err)
    }

    /// `(t − a)^α` or `(b − t)^α` depending on `anchor`.
    #[staticmethod]
    #[pyo3(signature = (a, b, alpha, anchor = "left"))]
    fn power_law(a: f64, b: f64, alpha: f64, anchor: &str) -> PyResult<Self> {
        let anchor = match anchor {
            "left" => Anchor::Left,
            "right" => Anchor::Right,
            other => return Err(err(format!("anchor must be \"left\" or \"right\", got {other:?}"))),
        };
        WeightedMeasure1D::new(a, b, Density::PowerLaw { alpha, anchor }).map(Self).map_err(err)
    }

    /// Piecewise-linear density through `(t[i], w[i])`.
    #[staticmethod]
    fn tabulated(a: f64, b: f64, t: Vec<f64>, w: Vec<f64>) -> PyResult<Self> {
        WeightedMeasure1D::new(a, b, Density::Tabulated { t, w }).map(Self).map_err(err)
    }

    #[getter]
    fn interval(&self) -> (f64, f64) {
        self.0.interval()
    }

    fn total_mass(&self) -> f64 {
        self.0.total_mass()
    }

    fn density(&self, t: f64) -> f64 {
        self.0.density_at(t)
    }

    /// Mass of `[a, x]`.
    fn cumulative(&self, x: f64) -> PyResult<f64> {
        self.0.cumulative(x).map_err(err)
    }

    /// Mass of `[x, b]`.
    fn upper(&self, x: f64) -> PyResult<f64> {
        self.0.upper(x).map_err(err)
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.0.interval();
        format!("Measure([{a}, {b}], {:?})", self.0.density())
    }
}

#[pyclass(name = "Function1D", module = "orlicz_lab", frozen)]
pub struct PyFunction1D(PiecewiseLinear1D);

#[pymethods]
impl PyFunction1D {
    #[new]
    fn new(knots: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        PiecewiseLinear1D::from_nodes(knots, values).map(Self).map_err(err)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }
}

#[pyclass(name = "Function2D", module = "orlicz_lab", frozen)]
pub struct PyFunction2D(PiecewiseBilinear2D);

#[pymethods]
impl PyFunction2D {
    /// `values[i][j]` is the value at `(x[i], y[j])`.
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>, values: Vec<Vec<f64>>) -> PyResult<Self> {
        PiecewiseBilinear2D::from_nodes(x, y, &values).map(Self).map_err(err)
    }

    fn __call__(&self, x: f64, y: f64) -> f64 {
        self.0.eval(x, y)
    }
}

/// A validated experiment built from the JSON configuration format.
#[pyclass(name = "Experiment", module = "orlicz_lab", frozen)]
pub struct PyExperiment(ExperimentConfig);

#[pymethods]
impl PyExperiment {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = ConfigFile::parse(text, "<string>").map_err(err)?;
        file.experiment().map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let file = ConfigFile::load(&path).map_err(err)?;
        file.experiment().map(Self).map_err(err)
    }

    /// The two-dimensional Poincaré inequality and its proof chain.
    fn check_poincare<'py>(&self, py: Python<'py>, f: &PyFunction2D) -> PyResult<Bound<'py, PyList>> {
        let rs = py.detach(|| verify::check_poincare(&self.0, &f.0)).map_err(err)?;
        reports(py, &rs)
    }

    /// The supporting norm inequalities.
    fn check_lemmas<'py>(&self, py: Python<'py>, f: &PyFunction2D) -> PyResult<Bound<'py, PyList>> {
        let rs = py.detach(|| verify::check_lemmas(&self.0, &f.0)).map_err(err)?;
        reports(py, &rs)
    }
}

#[pyfunction]
fn lp_norm(m: &PyMeasure, p: f64, f: &PyFunction1D) -> PyResult<f64> {
    norms::lp_norm(&m.0, p, &f.0).map_err(err)
}

#[pyfunction]
fn gauge_norm_1d(phi: &PyYoung, m: &PyMeasure, f: &PyFunction1D) -> PyResult<f64> {
    norms::gauge_norm_1d(&phi.0, &m.0, &f.0).map_err(err)
}

#[pyfunction]
fn gauge_norm_2d(phi: &PyYoung, m1: &PyMeasure, m2: &PyMeasure, f: &PyFunction2D) -> PyResult<f64> {
    let pm = ProductMeasure::new(m1.0.clone(), m2.0.clone());
    norms::gauge_norm_2d(&phi.0, &pm, &f.0).map_err(err)
}

/// `‖ ‖F‖_{L^{p₁}(m₁)} ‖_{L^Φ(m₂)}`.
#[pyfunction]
fn mixed_norm_p_phi(m1: &PyMeasure, p1: f64, m2: &PyMeasure, phi: &PyYoung, f: &PyFunction2D) -> PyResult<f64> {
    norms::mixed_norm_p_phi(&m1.0, p1, &m2.0, &phi.0, &f.0).map_err(err)
}

/// `‖ ‖F‖_{L^{p₂}(m₂)} ‖_{L^{s₁}(m₁)}`.
#[pyfunction]
fn mixed_norm_hat(m1: &PyMeasure, s1: f64, m2: &PyMeasure, p2: f64, f: &PyFunction2D) -> PyResult<f64> {
    norms::mixed_norm_hat(&m1.0, s1, &m2.0, p2, &f.0).map_err(err)
}

#[pyfunction]
fn iterated_gauge(phi: &PyYoung, m1: &PyMeasure, m2: &PyMeasure, f: &PyFunction2D) -> PyResult<f64> {
    norms::iterated_gauge(&phi.0, &m1.0, &m2.0, &f.0).map_err(err)
}

/// The `p = 1` constant as a report dict.
#[pyfunction]
fn k1<'py>(
    py: Python<'py>,
    phi: &PyYoung,
    mu: &PyMeasure,
    nu: &PyMeasure,
    w: &PyMeasure,
) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| k1_phi(&phi.0, &mu.0, &nu.0, &w.0)).map_err(err)?;
    to_py(py, &kconstant_json(&r))
}

/// `(K, K̃)` report dicts for `p > 1`.
#[pyfunction]
fn kp<'py>(
    py: Python<'py>,
    phi: &PyYoung,
    mu: &PyMeasure,
    nu: &PyMeasure,
    w: &PyMeasure,
    p: f64,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let (k, kt) = py.detach(|| kp_pair(&phi.0, &mu.0, &nu.0, &w.0, p)).map_err(err)?;
    Ok((to_py(py, &kconstant_json(&k))?, to_py(py, &kconstant_json(&kt))?))
}

/// Adds the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OrliczError", m.py().get_type::<OrliczError>())?;
    m.add_class::<PyYoung>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyFunction1D>()?;
    m.add_class::<PyFunction2D>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(gauge_norm_1d, m)?)?;
    m.add_function(wrap_pyfunction!(gauge_norm_2d, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_norm_p_phi, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_norm_hat, m)?)?;
    m.add_function(wrap_pyfunction!(iterated_gauge, m)?)?;
    m.add_function(wrap_pyfunction!(k1, m)?)?;
    m.add_function(wrap_pyfunction!(kp, m)?)?;
    Ok(())
}

#[pymodule]
fn orlicz_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
