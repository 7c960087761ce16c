//! Python bindings. Reports come back as plain dicts with exact values as
//! `{"exact": "p/q", "decimal": "..."}` entries.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use frobound::certify::{self, VerifyOptions};
use frobound::lp::Atom;
use frobound::moments::{BasisId, MomentVector};
use frobound::optimize::{global_min, MinOptions};
use frobound::region::{Direction, Form};
use frobound::threshold::{threshold as run_threshold, ThresholdOptions};
use frobound::{data, io, plot, Error, Poly2, Rational, Region};

fn err(e: Error) -> PyErr {
    match e {
        Error::Solver(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn basis(s: &str) -> PyResult<BasisId> {
    BasisId::parse_case(s).map_err(err)
}

fn min_opts(digits: usize, grid_n: usize) -> PyResult<MinOptions> {
    if digits < 30 {
        return Err(PyValueError::new_err(format!("precision {digits} below minimum 30")));
    }
    if grid_n < 33 {
        return Err(PyValueError::new_err(format!("grid size {grid_n} below minimum 33")));
    }
    Ok(MinOptions { grid_n, digits, ..MinOptions::default() })
}

/// Bivariate polynomial with rational coefficients.
#[pyclass(name = "Poly", frozen)]
struct PyPoly(Poly2);

#[pymethods]
impl PyPoly {
    /// Parses the JSON polynomial format.
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Poly2::from_json(json).map(PyPoly).map_err(err)
    }

    /// One of the packaged polynomials, by name.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        data::polynomial(name)
            .map(PyPoly)
            .ok_or_else(|| PyValueError::new_err(format!("unknown polynomial {name:?}")))
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.eval_f64(x, y)
    }

    /// Exact expectation against the target moments of `case`.
    fn expectation(&self, case: &str) -> PyResult<String> {
        let m = MomentVector::for_case(basis(case)?);
        m.expectation(&self.0).map(|q| q.to_string()).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Poly({} terms)", self.0.terms().count())
    }
}

/// The box `[-2, 2]^2` with an optional sum or product constraint.
#[pyclass(name = "Region", frozen)]
struct PyRegion(Region);

#[pymethods]
impl PyRegion {
    /// Accepts inline specs such as `"sum>=-2.47"` or `"product<=1/2"`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Region::parse_inline(spec).map(PyRegion).map_err(err)
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Region::from_json(json).map(PyRegion).map_err(err)
    }

    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        data::region_preset(name)
            .map(PyRegion)
            .ok_or_else(|| PyValueError::new_err(format!("unknown region preset {name:?}")))
    }

    /// Exact membership; coordinates are parsed as rationals.
    fn contains(&self, x: &str, y: &str) -> PyResult<bool> {
        let x = Rational::parse(x).map_err(err)?;
        let y = Rational::parse(y).map_err(err)?;
        Ok(self.0.contains_rational(&x, &y))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Region({})", self.0.to_json().replace('\n', ""))
    }
}

fn atoms_arg(spec: &str) -> PyResult<(Vec<Atom>, Option<Vec<Rational>>)> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        if let Some(pts) = data::points(name) {
            return Ok((pts.into_iter().map(|(x, y)| Atom::point(x, y)).collect(), None));
        }
        if let Some(w) = data::symmetric_witness(name) {
            return Ok((w.atoms.into_iter().map(Atom::Pair).collect(), Some(w.weights)));
        }
        return Err(PyValueError::new_err(format!("unknown atom set {name:?}")));
    }
    let f = io::parse_atoms(spec).map_err(err)?;
    Ok((f.atoms, f.weights))
}

/// Target moments of a case as a list of `(feature, exact value)` pairs.
#[pyfunction]
fn moments(case: &str) -> PyResult<Vec<(String, String)>> {
    let m = MomentVector::for_case(basis(case)?);
    Ok(m.basis.labels().into_iter().zip(m.values.iter().map(|v| v.to_string())).collect())
}

#[pyfunction]
#[pyo3(signature = (poly, region, digits = 60, grid_n = 257))]
fn minimize<'py>(
    py: Python<'py>,
    poly: &PyPoly,
    region: &PyRegion,
    digits: usize,
    grid_n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = min_opts(digits, grid_n)?;
    let m = py.detach(|| global_min(&poly.0, &region.0, &opts)).map_err(err)?;
    to_py(py, &io::min_result_json(&m))
}

#[pyfunction]
#[pyo3(signature = (poly, region, case, digits = 60, grid_n = 257, gap = 0.01))]
fn verify_hyperplane<'py>(
    py: Python<'py>,
    poly: &PyPoly,
    region: &PyRegion,
    case: &str,
    digits: usize,
    grid_n: usize,
    gap: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let m = MomentVector::for_case(basis(case)?);
    let opts = VerifyOptions { min: min_opts(digits, grid_n)?, gap, ..VerifyOptions::default() };
    let rep = py.detach(|| certify::verify_hyperplane(&poly.0, &region.0, &m, &opts)).map_err(err)?;
    to_py(py, &io::hyperplane_report_json(&rep))
}

/// `atoms` is either `builtin:<name>` or the JSON atoms format; `weights`,
/// when given, are exact strings and override any packaged weights.
#[pyfunction]
#[pyo3(signature = (atoms, region, case, weights = None, tol = None))]
fn verify_measure<'py>(
    py: Python<'py>,
    atoms: &str,
    region: &PyRegion,
    case: &str,
    weights: Option<Vec<String>>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let id = basis(case)?;
    let (atoms, packaged) = atoms_arg(atoms)?;
    let weights = match weights {
        Some(ws) => Some(ws.iter().map(|w| Rational::parse(w)).collect::<Result<Vec<_>, _>>().map_err(err)?),
        None => packaged,
    };
    let tol = tol.unwrap_or(match id {
        BasisId::A5 => 0.0,
        BasisId::B32 => 1e-9,
    });
    let m = MomentVector::for_case(id);
    let rep = py.detach(|| certify::verify_measure(&atoms, weights.as_deref(), &region.0, &m, tol)).map_err(err)?;
    to_py(py, &io::measure_report_json(&rep))
}

#[pyfunction]
fn identities(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &io::identities_json(&certify::verify_identity_suite()))
}

/// Bisects for the extremal bound of `form` (`"sum"` or `"product"`) in
/// direction `dir` (`"geq"` or `"leq"`).
#[pyfunction]
#[pyo3(signature = (case, form, dir, tol, digits = 60))]
fn threshold<'py>(
    py: Python<'py>,
    case: &str,
    form: &str,
    dir: &str,
    tol: f64,
    digits: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let id = basis(case)?;
    let form = match form {
        "sum" => Form::Sum,
        "product" => Form::Product,
        _ => return Err(PyValueError::new_err(format!("form must be sum or product, got {form:?}"))),
    };
    let dir = match dir {
        "geq" => Direction::Geq,
        "leq" => Direction::Leq,
        _ => return Err(PyValueError::new_err(format!("dir must be geq or leq, got {dir:?}"))),
    };
    let mut opts = ThresholdOptions::default();
    opts.feasibility.grid_n = match id {
        BasisId::A5 => 17,
        BasisId::B32 => 33,
    };
    opts.verify.min = min_opts(digits, opts.verify.min.grid_n)?;
    let t = py.detach(|| run_threshold(id, form, dir, tol, &opts)).map_err(err)?;
    to_py(py, &io::threshold_json(&t))
}

/// SVG scatter plot of an atom set, optionally with a region boundary.
#[pyfunction]
#[pyo3(signature = (atoms, region = None, title = "atoms"))]
fn plot_svg(atoms: &str, region: Option<&PyRegion>, title: &str) -> PyResult<String> {
    let (atoms, _) = atoms_arg(atoms)?;
    plot::scatter_svg(&atoms, region.map(|r| &r.0), title).map_err(err)
}

#[pymodule]
fn frobound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_class::<PyRegion>()?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(verify_hyperplane, m)?)?;
    m.add_function(wrap_pyfunction!(verify_measure, m)?)?;
    m.add_function(wrap_pyfunction!(identities, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(plot_svg, m)?)?;
    Ok(())
}
