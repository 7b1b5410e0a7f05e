//! Python bindings: the `nearpoly` extension module.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nearpoly::bench::{self, RandomSpec};
use nearpoly::fpbits;
use nearpoly::hexfloat;
use nearpoly::nearby::{self, DeltaReduction, SerendipityMode};
use nearpoly::{accurate, poly, Error, PlanOptions};

create_exception!(nearpoly, StalledError, PyArithmeticError, "Newton iteration could not make progress.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Overflow { .. } => PyOverflowError::new_err(e.to_string()),
        Error::Stalled { .. } => StalledError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn spec_of(spec: Option<&FloatSpec>) -> fpbits::FloatSpec {
    spec.map(|s| s.0).unwrap_or_default()
}

/// Emulated working precision (binary32 by default).
#[pyclass(frozen, from_py_object, name = "FloatSpec", module = "nearpoly")]
#[derive(Clone, Copy)]
struct FloatSpec(fpbits::FloatSpec);

#[pymethods]
impl FloatSpec {
    #[new]
    #[pyo3(signature = (mantissa_bits = 23, max_exponent = 127))]
    fn new(mantissa_bits: u32, max_exponent: i32) -> PyResult<Self> {
        fpbits::FloatSpec::new(mantissa_bits, max_exponent)
            .map(FloatSpec)
            .map_err(to_py)
    }

    #[getter]
    fn mantissa_bits(&self) -> u32 {
        self.0.mantissa_bits()
    }

    #[getter]
    fn max_exponent(&self) -> i32 {
        self.0.max_exponent()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps()
    }

    fn round(&self, v: f64) -> PyResult<f64> {
        self.0.to_working(v).map_err(to_py)
    }

    fn is_representable(&self, v: f64) -> bool {
        self.0.is_representable(v)
    }

    fn __repr__(&self) -> String {
        format!(
            "FloatSpec(mantissa_bits={}, max_exponent={})",
            self.0.mantissa_bits(),
            self.0.max_exponent()
        )
    }
}

/// Coefficients `P_0..P_n`, lowest degree first, in the working format.
#[pyclass(frozen, from_py_object, name = "Polynomial", module = "nearpoly")]
#[derive(Clone)]
struct Polynomial {
    inner: poly::Polynomial,
    spec: fpbits::FloatSpec,
}

#[pymethods]
impl Polynomial {
    /// With `rounded=True` coefficients are rounded to the working format;
    /// otherwise values that are not exactly representable are rejected.
    #[new]
    #[pyo3(signature = (coeffs, spec = None, rounded = false))]
    fn new(coeffs: Vec<f64>, spec: Option<&FloatSpec>, rounded: bool) -> PyResult<Self> {
        let spec = spec_of(spec);
        let inner = if rounded {
            poly::Polynomial::from_rounded(&coeffs, &spec)
        } else {
            poly::Polynomial::new(coeffs, &spec)
        }
        .map_err(to_py)?;
        Ok(Polynomial { inner, spec })
    }

    #[staticmethod]
    #[pyo3(signature = (text, spec = None))]
    fn from_json(text: &str, spec: Option<&FloatSpec>) -> PyResult<Self> {
        let spec = spec_of(spec);
        let inner = poly::Polynomial::from_json(text, &spec).map_err(to_py)?;
        Ok(Polynomial { inner, spec })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn horner(&self, x: f64) -> PyResult<f64> {
        poly::horner_eval(&self.inner, x, &self.spec).map_err(to_py)
    }

    fn reference(&self, x: f64) -> PyResult<f64> {
        poly::reference_eval(&self.inner, x).map_err(to_py)
    }

    fn e_max(&self, x: f64) -> f64 {
        poly::e_max(&self.inner, x, &self.spec)
    }

    fn derivative(&self) -> PyResult<Self> {
        let inner = poly::derivative(&self.inner, &self.spec).map_err(to_py)?;
        Ok(Polynomial {
            inner,
            spec: self.spec,
        })
    }

    /// Build a plan at `x` for repeated accurate evaluation nearby.
    #[pyo3(signature = (x, delta_abs = false, literal_serendipity = false))]
    fn plan(&self, x: f64, delta_abs: bool, literal_serendipity: bool) -> PyResult<Plan> {
        let options = options(delta_abs, literal_serendipity);
        let inner = nearby::build_plan_with(&self.inner, x, &self.spec, &options).map_err(to_py)?;
        Ok(Plan {
            inner,
            source: self.clone(),
        })
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({:?})", self.inner.coeffs())
    }

    fn __len__(&self) -> usize {
        self.inner.coeffs().len()
    }
}

fn options(delta_abs: bool, literal_serendipity: bool) -> PlanOptions {
    PlanOptions {
        delta: if delta_abs {
            DeltaReduction::Absolute
        } else {
            DeltaReduction::Signed
        },
        serendipity: if literal_serendipity {
            SerendipityMode::Literal
        } else {
            SerendipityMode::BudgetRelative
        },
    }
}

/// A nearby, exactly evaluable polynomial with its correction coefficients.
#[pyclass(frozen, name = "Plan", module = "nearpoly")]
struct Plan {
    inner: nearby::NearbyPlan,
    source: Polynomial,
}

#[pymethods]
impl Plan {
    #[getter]
    fn x_hat(&self) -> f64 {
        self.inner.x_hat
    }

    #[getter]
    fn p_hat(&self) -> Vec<f64> {
        self.inner.p_hat.clone()
    }

    /// `C_{-1}..C_{n-1}`.
    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.c.clone()
    }

    #[getter]
    fn partials(&self) -> Vec<f64> {
        self.inner.partials.clone()
    }

    #[getter]
    fn m_hat(&self) -> u32 {
        self.inner.m_hat
    }

    #[getter]
    fn r(&self) -> u32 {
        self.inner.r
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn eval(&self, x: f64) -> PyResult<f64> {
        accurate::eval_plan(&self.inner, x, &self.source.spec).map_err(to_py)
    }

    fn deflate(&self, root: f64) -> PyResult<Polynomial> {
        let inner = accurate::deflate(&self.inner, root, &self.source.spec).map_err(to_py)?;
        Ok(Polynomial {
            inner,
            spec: self.source.spec,
        })
    }

    /// Per-step condition records as dicts, from step `n-1` down to `0`.
    fn conditions<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let report = nearby::check_conditions(&self.inner, &self.source.inner, &self.source.spec);
        report
            .steps
            .iter()
            .map(|s| {
                let d = PyDict::new(py);
                d.set_item("step", s.step)?;
                d.set_item("delta", s.delta)?;
                d.set_item("input_ok", s.input_ok)?;
                d.set_item("output_ok", s.output_ok)?;
                Ok(d)
            })
            .collect()
    }

    fn all_ok(&self) -> bool {
        nearby::check_conditions(&self.inner, &self.source.inner, &self.source.spec).all_ok()
    }

    fn to_json(&self) -> String {
        let report = nearby::check_conditions(&self.inner, &self.source.inner, &self.source.spec);
        nearby::plan_to_json(&self.inner, &report)
    }
}

#[pyclass(frozen, get_all, name = "RootResult", module = "nearpoly")]
struct RootResult {
    root: f64,
    residual: f64,
    iterations: u32,
    converged: bool,
}

#[pymethods]
impl RootResult {
    fn __repr__(&self) -> String {
        format!(
            "RootResult(root={:e}, residual={:e}, iterations={}, converged={})",
            self.root,
            self.residual,
            self.iterations,
            if self.converged { "True" } else { "False" }
        )
    }
}

/// Newton polishing from `x0` with one plan built at `x0`.
#[pyfunction]
fn polish_root(p: &Polynomial, x0: f64) -> PyResult<RootResult> {
    let (r, _) = accurate::polish_root(&p.inner, x0, &p.spec).map_err(to_py)?;
    Ok(RootResult {
        root: r.root,
        residual: r.residual,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// Accurate value of `p` at `x` via a fresh plan; `P_0` at `x = 0`.
#[pyfunction]
fn eval_accurate(p: &Polynomial, x: f64) -> PyResult<f64> {
    if p.inner.degree() == 0 || x == 0.0 {
        return Ok(p.inner.coeffs()[0]);
    }
    let plan = nearby::build_plan(&p.inner, x, &p.spec).map_err(to_py)?;
    accurate::eval_plan(&plan, x, &p.spec).map_err(to_py)
}

/// Run the random-polynomial benchmark. Returns a dict with `rows` as
/// `(poly_id, root_index, root, err_horner, err_accurate, e_max)` tuples and
/// a `summary` dict.
#[pyfunction]
#[pyo3(signature = (order, difficulty = 1.0, count = 128, seed = 1, delta_abs = false, literal_serendipity = false))]
fn run_bench<'py>(
    py: Python<'py>,
    order: usize,
    difficulty: f64,
    count: usize,
    seed: u64,
    delta_abs: bool,
    literal_serendipity: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let fspec = fpbits::FloatSpec::SINGLE;
    let spec = RandomSpec::new(order, difficulty, seed, count, &fspec).map_err(to_py)?;
    let ex = bench::run_experiment_with(&spec, &fspec, &options(delta_abs, literal_serendipity))
        .map_err(to_py)?;
    let summary = bench::summarize(&ex.rows).map_err(to_py)?;
    let rows: Vec<_> = ex
        .rows
        .iter()
        .map(|r| (r.poly_id, r.root_index, r.root, r.err_horner, r.err_accurate, r.e_max))
        .collect();
    let stats = |s: &bench::Stats| -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("median", s.median)?;
        d.set_item("p10", s.p10)?;
        d.set_item("p90", s.p90)?;
        d.set_item("geometric_mean", s.geometric_mean)?;
        Ok(d)
    };
    let sd = PyDict::new(py);
    sd.set_item("rows", summary.rows)?;
    sd.set_item("horner", stats(&summary.horner)?)?;
    sd.set_item("accurate", stats(&summary.accurate)?)?;
    sd.set_item("improvement_factor", summary.improvement_factor)?;
    let out = PyDict::new(py);
    out.set_item("rows", rows)?;
    out.set_item("summary", sd)?;
    out.set_item("skipped_polys", ex.skipped_polys)?;
    out.set_item("skipped_roots", ex.skipped_roots)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (z, k, spec = None))]
fn truncate(z: f64, k: u32, spec: Option<&FloatSpec>) -> PyResult<f64> {
    fpbits::truncate(z, k, &spec_of(spec)).map_err(to_py)
}

#[pyfunction]
fn bit_count(z: f64) -> PyResult<u32> {
    fpbits::bit_count(z).map_err(to_py)
}

#[pyfunction]
fn exponent(z: f64) -> PyResult<i32> {
    fpbits::exponent(z).map_err(to_py)
}

#[pyfunction]
fn bits_lost(p: f64, hx: f64) -> u32 {
    fpbits::bits_lost(p, hx)
}

#[pyfunction]
#[pyo3(signature = (a, b, spec = None))]
fn product_is_exact(a: f64, b: f64, spec: Option<&FloatSpec>) -> bool {
    fpbits::product_is_exact(a, b, &spec_of(spec))
}

#[pyfunction]
fn format_hex(v: f64) -> String {
    hexfloat::format_hex(v)
}

#[pyfunction]
#[pyo3(signature = (text, spec = None))]
fn parse_value(text: &str, spec: Option<&FloatSpec>) -> PyResult<f64> {
    hexfloat::parse_value(text, &spec_of(spec)).map_err(to_py)
}

#[pymodule(name = "nearpoly")]
fn nearpoly_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<FloatSpec>()?;
    m.add_class::<Polynomial>()?;
    m.add_class::<Plan>()?;
    m.add_class::<RootResult>()?;
    m.add("StalledError", m.py().get_type::<StalledError>())?;
    m.add_function(wrap_pyfunction!(polish_root, m)?)?;
    m.add_function(wrap_pyfunction!(eval_accurate, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(truncate, m)?)?;
    m.add_function(wrap_pyfunction!(bit_count, m)?)?;
    m.add_function(wrap_pyfunction!(exponent, m)?)?;
    m.add_function(wrap_pyfunction!(bits_lost, m)?)?;
    m.add_function(wrap_pyfunction!(product_is_exact, m)?)?;
    m.add_function(wrap_pyfunction!(format_hex, m)?)?;
    m.add_function(wrap_pyfunction!(parse_value, m)?)?;
    Ok(())
}
