//! Python bindings: scalar evaluators, pole scans and normalization integrals.

use ep::hyp2f1::HypParams;
use ep::legendre::{self, Argument, EvalPoint};
use ep::polescan::{self, KParam, PoleRecord, Window};
use ep::{gamma, hyp2f1, norms, verify, Error};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(legendre_ep, LegendreError, PyValueError);
create_exception!(legendre_ep, PoleError, LegendreError);
create_exception!(legendre_ep, DivergentError, LegendreError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Pole { .. } => PoleError::new_err(e.to_string()),
        Error::Divergent(_) => DivergentError::new_err(e.to_string()),
        _ => LegendreError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for ep::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn rho_of(cosh_rho: f64) -> PyResult<f64> {
    legendre::rho_from_cosh(cosh_rho).py()
}

fn window(bounds: Option<(f64, f64, f64, f64)>) -> PyResult<Window> {
    match bounds {
        Some((a, b, c, d)) => Window::new(a, b, c, d).py(),
        None => Ok(Window::default()),
    }
}

#[pyfunction]
#[pyo3(name = "gamma")]
fn gamma_fn(z: Complex64) -> PyResult<Complex64> {
    gamma::gamma(z).py()
}

#[pyfunction]
fn recip_gamma(z: Complex64) -> Complex64 {
    gamma::recip_gamma(z)
}

#[pyfunction]
#[pyo3(name = "hyp2f1", signature = (a, b, c, x, regularized = false))]
fn hyp2f1_fn(a: Complex64, b: Complex64, c: Complex64, x: f64, regularized: bool) -> PyResult<Complex64> {
    let p = HypParams::new(a, b, c, x);
    if regularized {
        hyp2f1::hyp2f1_regularized(&p).py()
    } else {
        hyp2f1::hyp2f1(&p).py()
    }
}

/// `P^mu_nu(z)` for real `z > 1`.
#[pyfunction]
fn legendre_p(mu: Complex64, nu: Complex64, z: f64) -> PyResult<Complex64> {
    legendre::p_at(mu, nu, &Argument::value(z).py()?).py()
}

/// `Q^mu_nu(z)` for real `z > 1`, phase `e^{i mu pi}` included.
#[pyfunction]
fn legendre_q(mu: Complex64, nu: Complex64, z: f64) -> PyResult<Complex64> {
    legendre::q_at(mu, nu, &Argument::value(z).py()?).py()
}

/// `Q^{-1/2-K}_nu(cosh rho)` by one of the available routes.
#[pyfunction]
#[pyo3(signature = (k, nu, cosh_rho = 2.0, method = "direct"))]
fn q_of_k(k: f64, nu: Complex64, cosh_rho: f64, method: &str) -> PyResult<Complex64> {
    let rho = rho_of(cosh_rho)?;
    match method {
        "direct" => legendre::q_general(&EvalPoint::new(Complex64::new(-0.5 - k, 0.0), nu, rho).py()?).py(),
        "whipple" => legendre::q_via_whipple(k, nu, rho).py(),
        "asymptotic" => legendre::q_asymptotic(k, nu, rho).py(),
        other => Err(LegendreError::new_err(format!(
            "unknown method '{other}'; expected direct, whipple or asymptotic"
        ))),
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "legendre_ep")]
#[derive(Clone)]
struct Pole {
    k: f64,
    n: u64,
    nu: Complex64,
    residue: Complex64,
    source: String,
}

#[pymethods]
impl Pole {
    fn __repr__(&self) -> String {
        format!(
            "Pole(k={}, n={}, nu={}, residue={}{:+}j, source='{}')",
            self.k, self.n, self.nu.re, self.residue.re, self.residue.im, self.source
        )
    }
}

impl From<&PoleRecord> for Pole {
    fn from(p: &PoleRecord) -> Self {
        Pole {
            k: p.k,
            n: p.n,
            nu: p.nu_location,
            residue: p.residue,
            source: p.source.as_str().to_string(),
        }
    }
}

/// Surviving poles of `Q^{-1/2-K}_nu(cosh rho)` in the window, predicted
/// analytically or confirmed by contour integration.
#[pyfunction]
#[pyo3(signature = (k, cosh_rho = 2.0, window_bounds = None, confirm = false))]
fn poles(k: f64, cosh_rho: f64, window_bounds: Option<(f64, f64, f64, f64)>, confirm: bool) -> PyResult<Vec<Pole>> {
    let rho = rho_of(cosh_rho)?;
    let w = window(window_bounds)?;
    let kp = KParam::detect(k);
    let found = if confirm { polescan::confirm_poles(kp, &w, rho) } else { polescan::predict_poles(kp, &w, rho) };
    Ok(found.py()?.iter().map(Pole::from).collect())
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "legendre_ep")]
#[derive(Clone)]
struct ExceptionalPoint {
    k: f64,
    kind: String,
    total_poles: Option<u64>,
    count_in_window: usize,
    locations: Vec<f64>,
}

#[pymethods]
impl ExceptionalPoint {
    fn __repr__(&self) -> String {
        format!(
            "ExceptionalPoint(k={}, kind='{}', total_poles={:?}, count_in_window={})",
            self.k, self.kind, self.total_poles, self.count_in_window
        )
    }
}

#[pyfunction]
#[pyo3(signature = (k_min = -2.0, k_max = 2.0, step = 0.5, window_bounds = None))]
fn ep_table(k_min: f64, k_max: f64, step: f64, window_bounds: Option<(f64, f64, f64, f64)>) -> PyResult<Vec<ExceptionalPoint>> {
    let w = window(window_bounds)?;
    Ok(polescan::ep_table(k_min, k_max, step, &w)
        .py()?
        .into_iter()
        .map(|c| ExceptionalPoint {
            k: c.k,
            kind: c.kind.as_str().to_string(),
            total_poles: c.total_poles,
            count_in_window: c.pole_count_in_window,
            locations: c.locations.iter().map(|z| z.re).collect(),
        })
        .collect())
}

/// Normalization integral over conical degrees, `-1/2 < K < 0`.
#[pyfunction]
#[pyo3(signature = (k, cosh_rho = 2.0, method = "quadrature", tol = None))]
fn norm(k: f64, cosh_rho: f64, method: &str, tol: Option<f64>) -> PyResult<(f64, f64)> {
    let rho = rho_of(cosh_rho)?;
    match method {
        "quadrature" => {
            let r = norms::norm_quadrature(k, rho, tol.unwrap_or(1e-10)).py()?;
            Ok((r.value, r.abs_error_estimate))
        }
        "series" => {
            let r = norms::norm_residue_series(k, rho, tol.unwrap_or(1e-8), false).py()?;
            Ok((r.value, r.error_estimate))
        }
        other => Err(LegendreError::new_err(format!("unknown method '{other}'; expected quadrature or series"))),
    }
}

/// Regularized `K = 0` integral; returns `(numeric, analytic)`.
#[pyfunction]
#[pyo3(signature = (cosh_rho = 2.0, epsilon = 0.1))]
fn norm_regularized(cosh_rho: f64, epsilon: f64) -> PyResult<(f64, f64)> {
    let r = norms::norm_regularized_k0(rho_of(cosh_rho)?, epsilon).py()?;
    Ok((r.numeric.value, r.analytic))
}

/// Run the numerical self-checks; returns `(name, passed, worst_error)` rows.
#[pyfunction]
#[pyo3(signature = (filter = None, seed = 0))]
fn run_checks(py: Python<'_>, filter: Option<String>, seed: u64) -> PyResult<Vec<(String, bool, f64)>> {
    let reports = py.detach(|| verify::run_suite(filter.as_deref(), seed)).py()?;
    Ok(reports.into_iter().map(|r| (r.name, r.pass, r.worst_relative_error)).collect())
}

#[pymodule]
fn legendre_ep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("LegendreError", py.get_type::<LegendreError>())?;
    m.add("PoleError", py.get_type::<PoleError>())?;
    m.add("DivergentError", py.get_type::<DivergentError>())?;
    m.add_class::<Pole>()?;
    m.add_class::<ExceptionalPoint>()?;
    m.add_function(wrap_pyfunction!(gamma_fn, m)?)?;
    m.add_function(wrap_pyfunction!(recip_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(hyp2f1_fn, m)?)?;
    m.add_function(wrap_pyfunction!(legendre_p, m)?)?;
    m.add_function(wrap_pyfunction!(legendre_q, m)?)?;
    m.add_function(wrap_pyfunction!(q_of_k, m)?)?;
    m.add_function(wrap_pyfunction!(poles, m)?)?;
    m.add_function(wrap_pyfunction!(ep_table, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(norm_regularized, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    Ok(())
}
