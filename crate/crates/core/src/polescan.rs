//! Poles and zeros of `Q^{-1/2-K}_nu(cosh rho)` in the complex `nu` plane.
//!
//! Candidate poles sit at `nu = K - 1/2 - n`, `n >= 0`, the poles of
//! `Gamma(nu + 1/2 - K)` in the Whipple form. The companion factor
//! `P^{n-K}_K(coth rho)` vanishes at some of them:
//!
//! * non-integer `K`: never, so the family is infinite;
//! * integer `K >= 0`: for `n >= 2K + 1`, leaving `2K + 1` poles;
//! * negative integer `K`: for every `n`, leaving none.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma::{exp_i_pi, gamma_pole};
use crate::legendre::{q_general, rho_from_cosh, whipple_inner_p, EvalPoint};

pub const INTEGER_TOLERANCE: f64 = 1e-9;
pub const RESIDUE_FLOOR: f64 = 1e-12;
pub const DEFAULT_COSH_RHO: f64 = 2.0;
pub const DEFAULT_RADIUS: f64 = 1e-2;
pub const DEFAULT_SAMPLES: usize = 256;
/// Relative disagreement between `N` and `2N` samples that flags a contour
/// result as unconverged.
pub const SAMPLE_AGREEMENT: f64 = 1e-6;

/// The order parameter `K`, with integer intent either detected or stated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KParam {
    Integer(i64),
    Real(f64),
}

impl KParam {
    /// Treats `k` as an integer when it is within [`INTEGER_TOLERANCE`] of one.
    pub fn detect(k: f64) -> Self {
        let r = k.round();
        if (k - r).abs() <= INTEGER_TOLERANCE {
            KParam::Integer(r as i64)
        } else {
            KParam::Real(k)
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            KParam::Integer(n) => n as f64,
            KParam::Real(k) => k,
        }
    }

    /// Number of poles that survive cancellation, `None` when infinite.
    pub fn pole_count(&self) -> Option<u64> {
        match *self {
            KParam::Integer(n) if n < 0 => Some(0),
            KParam::Integer(n) => Some(2 * n as u64 + 1),
            KParam::Real(_) => None,
        }
    }

    /// Whether the candidate `nu = K - 1/2 - n` is cancelled.
    pub fn cancelled(&self, n: u64) -> bool {
        self.pole_count().map_or(false, |count| n >= count)
    }

    pub fn candidate(&self, n: u64) -> Complex64 {
        Complex64::new(self.value() - 0.5 - n as f64, 0.0)
    }
}

/// Rectangle in the `nu` plane, open on the left edge: `re_min < Re nu <= re_max`,
/// `im_min <= Im nu <= im_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window { re_min: -6.0, re_max: 1.0, im_min: -1.0, im_max: 1.0 }
    }
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !ok || !(re_min < re_max) || !(im_min < im_max) {
            return Err(Error::domain(format!(
                "window [{re_min}, {re_max}] x [{im_min}, {im_max}] is not well ordered"
            )));
        }
        Ok(Window { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Indices `n` with `K - 1/2 - n` inside the window.
    fn candidate_range(&self, k: f64) -> std::ops::RangeInclusive<u64> {
        if self.im_min > 0.0 || self.im_max < 0.0 {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        let first = (k - 0.5 - self.re_max).ceil().max(0.0);
        let span = k - 0.5 - self.re_min;
        let last = if span == span.floor() { span - 1.0 } else { span.floor() };
        if last < first {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        first as u64..=last as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Predicted,
    Numeric,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Predicted => "predicted",
            Source::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleRecord {
    pub k: f64,
    pub n: u64,
    pub nu_location: Complex64,
    pub residue: Complex64,
    pub source: Source,
    pub rho_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpKind {
    None,
    Finite,
    Infinite,
}

impl EpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EpKind::None => "none",
            EpKind::Finite => "finite",
            EpKind::Infinite => "infinite",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpClassification {
    pub k: f64,
    pub kind: EpKind,
    /// Total number of poles, `None` for an infinite family.
    pub total_poles: Option<u64>,
    pub pole_count_in_window: usize,
    pub window: Window,
    pub locations: Vec<Complex64>,
}

/// `Res_{nu = K-1/2-n} Q^{-1/2-K}_nu(cosh rho)
///  = -i e^{-iK pi} sqrt(pi/(2 sinh rho)) (-1)^n/n! P^{n-K}_K(coth rho)`.
pub fn analytic_residue(k: f64, n: u64, rho: f64) -> Result<Complex64> {
    let nu0 = Complex64::new(k - 0.5 - n as f64, 0.0);
    let pre = -Complex64::i() * exp_i_pi(Complex64::new(-k, 0.0)) * (PI / (2.0 * rho.sinh())).sqrt();
    Ok(pre * gamma_pole(n).residue * whipple_inner_p(k, nu0, rho)?)
}

/// Surviving poles inside `window`, with their analytic residues.
pub fn predict_poles(k: KParam, window: &Window, rho: f64) -> Result<Vec<PoleRecord>> {
    let kv = k.value();
    window
        .candidate_range(kv)
        .filter(|&n| !k.cancelled(n))
        .map(|n| {
            Ok(PoleRecord {
                k: kv,
                n,
                nu_location: k.candidate(n),
                residue: analytic_residue(kv, n, rho)?,
                source: Source::Predicted,
                rho_used: rho,
            })
        })
        .collect()
}

/// Candidate locations inside `window` removed by cancellation.
pub fn cancelled_locations(k: KParam, window: &Window) -> Vec<(u64, Complex64)> {
    window
        .candidate_range(k.value())
        .filter(|&n| k.cancelled(n))
        .map(|n| (n, k.candidate(n)))
        .collect()
}

pub fn classify_exceptional(k: KParam, window: &Window) -> EpClassification {
    let kv = k.value();
    let locations: Vec<Complex64> = window
        .candidate_range(kv)
        .filter(|&n| !k.cancelled(n))
        .map(|n| k.candidate(n))
        .collect();
    let total_poles = k.pole_count();
    let kind = match total_poles {
        Some(0) => EpKind::None,
        Some(_) => EpKind::Finite,
        None => EpKind::Infinite,
    };
    EpClassification { k: kv, kind, total_poles, pole_count_in_window: locations.len(), window: *window, locations }
}

/// Classification rows for `K = k_min, k_min + step, ..., <= k_max`.
pub fn ep_table(k_min: f64, k_max: f64, step: f64, window: &Window) -> Result<Vec<EpClassification>> {
    if !(step > 0.0) || !(k_min <= k_max) || !k_min.is_finite() || !k_max.is_finite() {
        return Err(Error::domain(format!("bad K range [{k_min}, {k_max}] step {step}")));
    }
    let count = ((k_max - k_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| classify_exceptional(KParam::detect(k_min + i as f64 * step), window))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourResidue {
    pub residue: Complex64,
    /// Same integral with twice the samples.
    pub check: Complex64,
    pub samples: usize,
    /// True when the two sample counts disagree by more than
    /// [`SAMPLE_AGREEMENT`] relative.
    pub unconverged: bool,
}

fn trapezoid_circle(k: f64, nu0: Complex64, rho: f64, radius: f64, samples: usize) -> Result<Complex64> {
    let mu = Complex64::new(-0.5 - k, 0.0);
    let values: Vec<Result<Complex64>> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / samples as f64;
            let step = Complex64::from_polar(radius, theta);
            let q = q_general(&EvalPoint::new(mu, nu0 + step, rho)?)?;
            Ok(q * step)
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for v in values {
        sum += v?;
    }
    Ok(sum / samples as f64)
}

/// `(1/2 pi i) \oint Q^{-1/2-K}_nu(cosh rho) dnu` on `|nu - nu0| = radius`.
pub fn numeric_residue(k: f64, nu0: Complex64, rho: f64, radius: f64, samples: usize) -> Result<ContourResidue> {
    if samples < 64 {
        return Err(Error::domain(format!("contour needs at least 64 samples, got {samples}")));
    }
    if !(radius > 0.0) || radius >= 0.5 {
        return Err(Error::domain(format!("contour radius {radius} must lie in (0, 0.5)")));
    }
    let residue = trapezoid_circle(k, nu0, rho, radius, samples)?;
    let check = trapezoid_circle(k, nu0, rho, radius, 2 * samples)?;
    let scale = check.norm().max(RESIDUE_FLOOR);
    Ok(ContourResidue {
        residue,
        check,
        samples,
        unconverged: (residue - check).norm() > SAMPLE_AGREEMENT * scale,
    })
}

/// Poles inside `window` confirmed by contour integration.
pub fn confirm_poles(k: KParam, window: &Window, rho: f64) -> Result<Vec<PoleRecord>> {
    let predicted = predict_poles(k, window, rho)?;
    predicted
        .iter()
        .map(|p| {
            let c = numeric_residue(p.k, p.nu_location, rho, DEFAULT_RADIUS, DEFAULT_SAMPLES)?;
            Ok(PoleRecord { residue: c.residue, source: Source::Numeric, ..*p })
        })
        .collect()
}

/// `log10 |Q^{-1/2-K}_nu(cosh rho)|` on an `nx` by `ny` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub k: f64,
    pub rho: f64,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, rows along `Im nu` from `im_min`, NaN where evaluation failed.
    pub values: Vec<f64>,
}

impl ScanGrid {
    pub fn re_axis(&self) -> Vec<f64> {
        axis(self.window.re_min, self.window.re_max, self.nx)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        axis(self.window.im_min, self.window.im_max, self.ny)
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn failed_cells(&self) -> usize {
        self.values.iter().filter(|v| !v.is_finite()).count()
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn scan_grid(k: f64, window: &Window, nx: usize, ny: usize, rho: f64) -> Result<ScanGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::domain(format!("grid needs nx, ny >= 2, got {nx} x {ny}")));
    }
    let point = EvalPoint::new(Complex64::new(-0.5 - k, 0.0), Complex64::new(0.0, 0.0), rho)?;
    let xs = axis(window.re_min, window.re_max, nx);
    let ys = axis(window.im_min, window.im_max, ny);
    let values = (0..nx * ny)
        .into_par_iter()
        .map(|cell| {
            let nu = Complex64::new(xs[cell % nx], ys[cell / nx]);
            match q_general(&EvalPoint { nu, ..point }) {
                Ok(q) => q.norm().log10(),
                Err(_) => f64::NAN,
            }
        })
        .collect();
    Ok(ScanGrid { k, rho, window: *window, nx, ny, values })
}

/// Real zero of `Q^{-1/2-K}_nu(cosh rho)` nearest `nu = -3/2 - m`.
///
/// For real `K` and real `nu` the function is `e^{-i pi (1/2+K)}` times a
/// real function; the root of that real part is bracketed outward from
/// `-3/2 - m` and refined by bisection.
pub fn locate_zero(k: f64, m: u32, rho: f64) -> Result<f64> {
    let mu = Complex64::new(-0.5 - k, 0.0);
    let phase = exp_i_pi(-mu);
    let f = |nu: f64| -> Result<f64> {
        Ok((q_general(&EvalPoint::new(mu, nu.into(), rho)?)? * phase).re)
    };
    let center = -1.5 - m as f64;
    let mut delta = 1e-3;
    let (mut lo, mut hi) = loop {
        let (a, b) = (center - delta, center + delta);
        if f(a)?.signum() != f(b)?.signum() {
            break (a, b);
        }
        delta *= 2.0;
        if delta > 0.45 {
            return Err(Error::domain(format!("no zero of Q bracketed near nu = {center}")));
        }
    };
    let mut flo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn default_rho() -> f64 {
    rho_from_cosh(DEFAULT_COSH_RHO).expect("default cosh rho > 1")
}
