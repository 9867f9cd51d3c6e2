//! Complex gamma function kernel.
//!
//! Lanczos approximation (g = 607/128, 15 coefficients) in the half plane
//! `Re z >= 1/2`, reflection `Gamma(z) Gamma(1-z) = pi / sin(pi z)` elsewhere.
//! The reciprocal gamma function is evaluated as an entire function so that
//! the zeros at nonpositive integers come out exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Distance below which a point is treated as a nonpositive integer by
/// [`recip_gamma`] and by the pole-aware callers in the Legendre layer.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Distance below which `gamma`/`log_gamma` refuse to evaluate.
const EXACT_POLE: f64 = 1e-300;

/// Beyond this `|Im z|` the reflection formula is evaluated in log form to
/// keep `sin(pi z)` and `Gamma(1-z)` from overflowing separately.
const LOG_REFLECTION_IM: f64 = 20.0;

/// Pole of `Gamma` at `z = -n` and its residue `(-1)^n / n!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPoleInfo {
    pub index: u64,
    pub location: Complex64,
    pub residue: Complex64,
}

/// Returns `n` when `z` lies within `tol` of the nonpositive integer `-n`.
pub fn nonpositive_integer(z: Complex64, tol: f64) -> Option<u64> {
    if z.im.abs() > tol {
        return None;
    }
    let n = z.re.round();
    if n <= 0.0 && (z.re - n).abs() <= tol {
        Some((-n) as u64)
    } else {
        None
    }
}

fn is_odd(n: f64) -> bool {
    (n % 2.0) != 0.0
}

/// `sin(pi z)` with exact reduction of the real part, so that zeros at the
/// integers are reproduced without the rounding of `pi * z`.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let r = z.re - n;
    let y = PI * z.im;
    let (s, c) = (PI * r).sin_cos();
    let v = Complex64::new(s * y.cosh(), c * y.sinh());
    if is_odd(n) {
        -v
    } else {
        v
    }
}

/// `cos(pi x)` and `sin(pi x)` for real `x` with exact reduction.
pub fn cos_sin_pi(x: f64) -> (f64, f64) {
    let n = x.round();
    let r = x - n;
    let (s, c) = (PI * r).sin_cos();
    if is_odd(n) {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// `exp(i pi w)` for complex `w`.
pub fn exp_i_pi(w: Complex64) -> Complex64 {
    let (c, s) = cos_sin_pi(w.re);
    Complex64::new(c, s) * (-PI * w.im).exp()
}

/// `ln sin(pi z)`, on some branch, stable for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < LOG_REFLECTION_IM {
        return sin_pi(z).ln();
    }
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), reduced mod 2.
    let r = z.re - 2.0 * (z.re / 2.0).round();
    let y = z.im;
    let small = Complex64::new(0.0, 2.0 * PI * r).exp() * (-2.0 * PI * y).exp();
    let tail = (Complex64::new(1.0, 0.0) - small).ln();
    Complex64::new(PI * y + 0.5f64.ln(), -PI * r + 0.5 * PI) + tail
}

fn lanczos_ln(z: Complex64) -> Complex64 {
    let mut s = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += c / (z + (i as f64 - 1.0));
    }
    let t = z + (LANCZOS_G - 0.5);
    (z - 0.5) * t.ln() - t + LN_SQRT_2PI + s.ln()
}

/// `ln Gamma(z)` without pole check and without branch normalization.
pub(crate) fn log_gamma_unwrapped(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lanczos_ln(z)
    } else {
        LN_PI - ln_sin_pi(z) - lanczos_ln(1.0 - z)
    }
}

fn check_pole(z: Complex64) -> Result<()> {
    if nonpositive_integer(z, EXACT_POLE).is_some() {
        return Err(Error::pole("z", z));
    }
    Ok(())
}

fn wrap_phase(im: f64) -> f64 {
    let w = im - 2.0 * PI * (im / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Principal logarithm of `Gamma(z)`: the imaginary part lies in `(-pi, pi]`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    let v = log_gamma_unwrapped(z);
    Ok(Complex64::new(v.re, wrap_phase(v.im)))
}

// (n-1)! for exact integers 1..=23, all exactly representable.
fn small_factorial(z: Complex64) -> Option<f64> {
    if z.im != 0.0 || z.re < 1.0 || z.re > 23.0 || z.re.fract() != 0.0 {
        return None;
    }
    Some((2..z.re as u32).map(f64::from).product())
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if let Some(f) = small_factorial(z) {
        return Ok(f.into());
    }
    if z.re >= 0.5 {
        Ok(lanczos_ln(z).exp())
    } else if z.im.abs() < LOG_REFLECTION_IM {
        let s = sin_pi(z);
        if s == Complex64::new(0.0, 0.0) {
            return Err(Error::pole("z", z));
        }
        Ok(PI / (s * lanczos_ln(1.0 - z).exp()))
    } else {
        Ok(log_gamma_unwrapped(z).exp())
    }
}

/// `1 / Gamma(z)`, entire. Exactly zero within [`POLE_TOLERANCE`] of a
/// nonpositive integer.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if nonpositive_integer(z, POLE_TOLERANCE).is_some() {
        return Complex64::new(0.0, 0.0);
    }
    if let Some(f) = small_factorial(z) {
        return (1.0 / f).into();
    }
    if z.re >= 0.5 {
        (-lanczos_ln(z)).exp()
    } else if z.im.abs() < LOG_REFLECTION_IM {
        sin_pi(z) * lanczos_ln(1.0 - z).exp() / PI
    } else {
        (-log_gamma_unwrapped(z)).exp()
    }
}

/// Real-argument convenience wrapper.
pub fn recip_gamma_real(x: f64) -> f64 {
    recip_gamma(Complex64::new(x, 0.0)).re
}

pub fn gamma_pole(n: u64) -> GammaPoleInfo {
    let mut inv_fact = 1.0f64;
    for j in 2..=n {
        inv_fact /= j as f64;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    GammaPoleInfo {
        index: n,
        location: Complex64::new(-(n as f64), 0.0),
        residue: Complex64::new(sign * inv_fact, 0.0),
    }
}

/// `Gamma(a) / Gamma(b)` evaluated in log space; zero when `b` sits on a
/// pole of `Gamma`.
pub(crate) fn gamma_ratio(a: Complex64, b: Complex64) -> Result<Complex64> {
    check_pole(a)?;
    if nonpositive_integer(b, POLE_TOLERANCE).is_some() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((log_gamma_unwrapped(a) - log_gamma_unwrapped(b)).exp())
}
