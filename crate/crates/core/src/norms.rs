//! The normalization integral
//!
//! ```text
//! I(K, rho) = \int_0^\infty |Q^{-1/2-K}_{-1/2+i tau}(cosh rho)|^2 dtau
//! ```
//!
//! by real-axis quadrature, by the residue series obtained from closing the
//! contour in the upper half `tau` plane, and in the regularized `K = 0`
//! form where the whole series collapses onto the `n = 0` term.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::{gamma_ratio, log_gamma_unwrapped, nonpositive_integer, sin_pi, POLE_TOLERANCE};
use crate::hyp2f1::{hyp2f1, HypParams};
use crate::polescan::KParam;
use crate::quadrature::{integrate, DEFAULT_MAX_PANELS};

pub const DEFAULT_TAIL_CUT: f64 = 20.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Partial sums fed to the extrapolation: `N = 32, 64, ..., 1024`.
const SERIES_CHECKPOINTS: [usize; 6] = [32, 64, 128, 256, 512, 1024];

/// A window of this many terms without any decrease means divergence.
const DECAY_WINDOW: usize = 50;

fn amplitude(rho: f64) -> f64 {
    PI / (2.0 * rho.sinh())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("rho = {rho} must be > 0")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandValue {
    pub value: f64,
    /// Imaginary part left over from the complex arithmetic.
    pub imag_residual: f64,
}

/// `(pi/(2 sinh rho)) Gamma(i tau - K) Gamma(-i tau - K) P^{-i tau}_K P^{i tau}_K (coth rho)`.
///
/// The `((z+1)/(z-1))^{-+ i tau/2}` prefactors of the two `P` cancel, and
/// the gammas are combined in log space so large `tau` does not overflow.
pub fn integrand(k: f64, tau: f64, rho: f64) -> Result<IntegrandValue> {
    check_rho(rho)?;
    let s = Complex64::new(-k, tau);
    if nonpositive_integer(s, POLE_TOLERANCE).is_some() {
        return Err(Error::pole("tau", tau.into()));
    }
    let it = Complex64::new(0.0, tau);
    let log = log_gamma_unwrapped(it - k) - log_gamma_unwrapped(it + 1.0)
        + log_gamma_unwrapped(-it - k)
        - log_gamma_unwrapped(1.0 - it);
    let x = 0.5 * (1.0 - 1.0 / rho.tanh());
    let a = Complex64::new(-k, 0.0);
    let b = Complex64::new(k + 1.0, 0.0);
    let f_up = hyp2f1(&HypParams::new(a, b, 1.0 + it, x))?;
    let f_down = hyp2f1(&HypParams::new(a, b, 1.0 - it, x))?;
    let v = log.exp() * f_up * f_down * amplitude(rho);
    Ok(IntegrandValue { value: v.re, imag_residual: v.im })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub tail_cut: f64,
    /// Largest `|Im| / |Re|` seen in the integrand.
    pub imag_residual: f64,
}

fn check_integrable(k: f64) -> Result<()> {
    if !(k > -0.5) {
        return Err(Error::Divergent(format!(
            "K = {k}: the integrand decays as tau^(-2-2K), integrable only for K > -1/2"
        )));
    }
    if let KParam::Integer(n) = KParam::detect(k) {
        return Err(Error::Divergent(format!(
            "K = {n}: Gamma(i tau - K) has a pole at tau = 0 and the integral diverges there"
        )));
    }
    Ok(())
}

/// Adaptive quadrature on `[0, T]`, the large-`tau` form
/// `A T^{-1-2K} / (1+2K)` beyond `T`, and a numerical correction for what
/// that form misses, integrated in `s = T / tau`.
pub fn norm_quadrature_with_cut(k: f64, rho: f64, tol: f64, tail_cut: f64) -> Result<QuadratureResult> {
    check_rho(rho)?;
    check_integrable(k)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be > 0")));
    }
    let amp = amplitude(rho);
    let p = 2.0 + 2.0 * k;
    let imag = std::cell::Cell::new(0.0f64);
    let f = |tau: f64| -> Result<f64> {
        let v = integrand(k, tau, rho)?;
        if v.value != 0.0 {
            imag.set(imag.get().max((v.imag_residual / v.value).abs()));
        }
        Ok(v.value)
    };
    let head = integrate(f, 0.0, tail_cut, 0.5 * tol, 0.0, DEFAULT_MAX_PANELS)?;
    let tail = amp * tail_cut.powf(1.0 - p) / (p - 1.0);
    let correction = integrate(
        |s: f64| {
            let tau = tail_cut / s;
            Ok((f(tau)? - amp * tau.powf(-p)) * tail_cut / (s * s))
        },
        0.0,
        1.0,
        0.25 * tol,
        0.0,
        DEFAULT_MAX_PANELS,
    )?;
    let value = head.value + tail + correction.value;
    let abs_error_estimate = head.abs_error + correction.abs_error;
    if abs_error_estimate > tol {
        return Err(Error::Tolerance { requested: tol, achieved: abs_error_estimate });
    }
    Ok(QuadratureResult {
        value,
        abs_error_estimate,
        evaluations: head.evaluations + correction.evaluations,
        tail_cut,
        imag_residual: imag.get(),
    })
}

pub fn norm_quadrature(k: f64, rho: f64, tol: f64) -> Result<QuadratureResult> {
    norm_quadrature_with_cut(k, rho, tol, DEFAULT_TAIL_CUT)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSeriesResult {
    pub value: f64,
    pub error_estimate: f64,
    pub terms_used: usize,
    pub last_term_magnitude: f64,
    /// `|Im| / |Re|` of the accumulated sum.
    pub imag_residual: f64,
    /// Upper-half-plane terms from the second gamma factor (extended mode only).
    pub reflected_terms: usize,
}

/// One pole contribution `(-1)^j/j! Gamma(j-2K) P^{K-j}_K P^{j-K}_K (coth rho)`,
/// written as `-sin(pi K)/(pi (j-K)) Gamma(j-2K)/Gamma(j+1) F F`.
pub fn residue_term(k: f64, j: usize, rho: f64) -> Result<Complex64> {
    let jf = j as f64;
    let x = 0.5 * (1.0 - 1.0 / rho.tanh());
    let a = Complex64::new(-k, 0.0);
    let b = Complex64::new(k + 1.0, 0.0);
    let f1 = hyp2f1(&HypParams::new(a, b, Complex64::new(1.0 - k + jf, 0.0), x))?;
    let f2 = hyp2f1(&HypParams::new(a, b, Complex64::new(1.0 + k - jf, 0.0), x))?;
    let g = gamma_ratio(Complex64::new(jf - 2.0 * k, 0.0), Complex64::new(jf + 1.0, 0.0))?;
    let s = sin_pi(Complex64::new(k, 0.0));
    Ok(-s / (PI * (jf - k)) * g * f1 * f2)
}

fn check_series_domain(k: f64, extended: bool) -> Result<()> {
    if k > -0.5 && k < 0.0 {
        return Ok(());
    }
    if !extended {
        return Err(Error::domain(format!(
            "the residue series is derived for -1/2 < K < 0, got K = {k} (extended mode covers K > 0)"
        )));
    }
    if !(k > 0.0) {
        return Err(Error::domain(format!("extended residue series needs K > 0, got K = {k}")));
    }
    if matches!(KParam::detect(k), KParam::Integer(_)) || matches!(KParam::detect(2.0 * k), KParam::Integer(_)) {
        return Err(Error::domain(format!(
            "K = {k}: integer or half-integer K puts poles of the two gamma factors on top of each other"
        )));
    }
    Ok(())
}

// Solves S_N = S - N^{-a} sum_{i<m} e_i N^{-i} for S through the last m+1 points.
fn extrapolate(ns: &[usize], sums: &[f64], a: f64, m: usize) -> f64 {
    let rows = m + 1;
    let start = ns.len() - rows;
    let mut mat = vec![vec![0.0f64; rows + 1]; rows];
    for (r, row) in mat.iter_mut().enumerate() {
        let n = ns[start + r] as f64;
        row[0] = 1.0;
        for i in 0..m {
            row[1 + i] = -n.powf(-a - i as f64);
        }
        row[rows] = sums[start + r];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..rows {
        let piv = (col..rows)
            .max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))
            .expect("nonempty");
        mat.swap(col, piv);
        for r in 0..rows {
            if r != col {
                let factor = mat[r][col] / mat[col][col];
                for c in col..=rows {
                    mat[r][c] -= factor * mat[col][c];
                }
            }
        }
    }
    mat[0][rows] / mat[0][0]
}

/// Residue-series value of `I(K, rho)`.
///
/// Terms decay only like `n^{-2-2K}` and do not alternate, so the partial
/// sums at `N = 32 ... 1024` are extrapolated with the model
/// `S_N = S - N^{-(1+2K)} (e_0 + e_1/N + ...)`; the error estimate is the
/// change from dropping the highest correction order.
///
/// With `extended` set and `K > 0`, the poles of `Gamma(-i tau - K)` that
/// have crossed into the upper half plane are subtracted.
pub fn norm_residue_series(k: f64, rho: f64, tol: f64, extended: bool) -> Result<ResidueSeriesResult> {
    check_rho(rho)?;
    check_series_domain(k, extended)?;
    let scale = PI * amplitude(rho);
    let first = if k > 0.0 { k.floor() as usize + 1 } else { 0 };
    let mut reflected = Complex64::new(0.0, 0.0);
    for m in 0..first {
        reflected += residue_term(k, m, rho)?;
    }
    let n_max = *SERIES_CHECKPOINTS.last().expect("nonempty");
    let mut sum = -reflected;
    let mut sums = Vec::new();
    let mut mags: Vec<f64> = Vec::new();
    let mut last = 0.0;
    let mut small_run = 0;
    for j in first..first + n_max {
        let t = residue_term(k, j, rho)?;
        sum += t;
        last = t.norm();
        mags.push(last);
        if mags.len() > DECAY_WINDOW && last >= mags[mags.len() - 1 - DECAY_WINDOW] {
            return Err(Error::NonConvergence { terms: mags.len() });
        }
        let count = j - first + 1;
        if SERIES_CHECKPOINTS.contains(&count) {
            sums.push(sum.re);
        }
        // Exact convergence is possible when the terms drop off fast.
        small_run = if last <= 1e-17 * sum.norm() { small_run + 1 } else { 0 };
        if small_run >= 2 {
            let value = scale * sum.re;
            return Ok(ResidueSeriesResult {
                value,
                error_estimate: scale * last,
                terms_used: count + first,
                last_term_magnitude: scale * last,
                imag_residual: (sum.im / sum.re).abs(),
                reflected_terms: first,
            });
        }
    }
    let a = 1.0 + 2.0 * k;
    let orders = SERIES_CHECKPOINTS.len() - 1;
    let best = extrapolate(&SERIES_CHECKPOINTS, &sums, a, orders);
    let lower = extrapolate(&SERIES_CHECKPOINTS, &sums, a, orders - 1);
    let value = scale * best;
    let error_estimate = scale * (best - lower).abs();
    if error_estimate > tol * value.abs() {
        return Err(Error::Tolerance { requested: tol * value.abs(), achieved: error_estimate });
    }
    Ok(ResidueSeriesResult {
        value,
        error_estimate,
        terms_used: n_max + first,
        last_term_magnitude: scale * last,
        imag_residual: (sum.im / sum.re).abs(),
        reflected_terms: first,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedK0 {
    pub epsilon: f64,
    pub analytic: f64,
    pub numeric: QuadratureResult,
}

/// `(pi/(2 sinh rho)) \int_0^\infty dtau / (tau^2 + eps^2)` against
/// `pi^2 / (4 eps sinh rho)`. The numeric side maps `tau = eps s/(1-s)`
/// onto `s in [0, 1)`.
pub fn norm_regularized_k0(rho: f64, epsilon: f64) -> Result<RegularizedK0> {
    check_rho(rho)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!("epsilon = {epsilon} must be > 0")));
    }
    let amp = amplitude(rho);
    let analytic = PI * amp / (2.0 * epsilon);
    let integral = integrate(
        |s: f64| {
            let tau = epsilon * s / (1.0 - s);
            let dtau = epsilon / ((1.0 - s) * (1.0 - s));
            Ok(amp * dtau / (tau * tau + epsilon * epsilon))
        },
        0.0,
        1.0,
        0.0,
        1e-12,
        DEFAULT_MAX_PANELS,
    )?;
    let numeric = QuadratureResult {
        value: integral.value,
        abs_error_estimate: integral.abs_error,
        evaluations: integral.evaluations,
        tail_cut: f64::INFINITY,
        imag_residual: 0.0,
    };
    let rel = (numeric.value - analytic).abs() / analytic;
    if rel > 1e-6 {
        return Err(Error::Tolerance { requested: 1e-6 * analytic, achieved: rel * analytic });
    }
    Ok(RegularizedK0 { epsilon, analytic, numeric })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseRow {
    pub epsilon: f64,
    /// `n = 0` pole contribution at `K = -epsilon`.
    pub n0_term: f64,
    /// Sum of the `n >= 1` contributions.
    pub tail: f64,
    /// `pi^2 / (4 epsilon sinh rho)`.
    pub analytic: f64,
    /// `(n0_term + tail) / analytic`.
    pub ratio: f64,
}

/// Residue series at `K = -epsilon` split into its `n = 0` term and the rest.
pub fn collapse_demo(rho: f64, eps_sequence: &[f64]) -> Result<Vec<CollapseRow>> {
    check_rho(rho)?;
    let scale = PI * amplitude(rho);
    eps_sequence
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::domain(format!("epsilon = {eps} must lie in (0, 1/2)")));
            }
            let total = norm_residue_series(-eps, rho, 1e-6, false)?.value;
            let n0_term = scale * residue_term(-eps, 0, rho)?.re;
            let analytic = PI * amplitude(rho) / (2.0 * eps);
            Ok(CollapseRow { epsilon: eps, n0_term, tail: total - n0_term, analytic, ratio: total / analytic })
        })
        .collect()
}
