//! Gauss hypergeometric function `2F1(a, b; c; x)` for complex parameters
//! and real `x < 1`, plus the regularized form `2F1 / Gamma(c)`, which is
//! entire in `c`.
//!
//! Region policy:
//!
//! * `x < 0`: Pfaff map onto `x / (x - 1)` in `(0, 1)`;
//! * `0 <= x <= 0.9`: direct power series (Euler map first when it turns the
//!   series into a polynomial);
//! * `0.9 < x < 1`: connection formula in `1 - x`, written with reciprocal
//!   gammas only so that it stays finite through `c - a - b` hitting an
//!   integer, where the limit is taken by symmetric extrapolation.
//!
//! Parameters are reordered so that `a <= b` lexicographically before any
//! work is done, so every route is bitwise symmetric in `a` and `b`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::{gamma, nonpositive_integer, recip_gamma, sin_pi, POLE_TOLERANCE};

pub const TERM_BUDGET: usize = 10_000;
pub const TERM_TOLERANCE: f64 = 1e-15;

/// Largest argument summed directly; above it the `1 - x` connection is used.
pub const DIRECT_LIMIT: f64 = 0.9;

/// Below this `|x|` the Euler map is not worth it.
const EULER_FROM: f64 = 0.5;

/// `c - a - b` closer than this to an integer is treated as degenerate.
const DEGENERATE_WIDTH: f64 = 2.5e-4;
const DEGENERATE_STEP: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub x: f64,
}

impl HypParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, x: f64) -> Self {
        HypParams { a, b, c, x }
    }

    pub fn real(a: f64, b: f64, c: f64, x: f64) -> Self {
        HypParams::new(a.into(), b.into(), c.into(), x)
    }

    fn canonical(mut self) -> Self {
        if (self.b.re, self.b.im) < (self.a.re, self.a.im) {
            std::mem::swap(&mut self.a, &mut self.b);
        }
        self
    }

    /// Number of terms after which the series stops, when `a` or `b` is a
    /// nonpositive integer.
    pub fn terminating_degree(&self) -> Option<u64> {
        match (
            nonpositive_integer(self.a, POLE_TOLERANCE),
            nonpositive_integer(self.b, POLE_TOLERANCE),
        ) {
            (Some(n), Some(m)) => Some(n.min(m)),
            (Some(n), None) | (None, Some(n)) => Some(n),
            (None, None) => None,
        }
    }
}

/// Single-term argument maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Identity,
    Pfaff,
    Euler,
}

/// Result of [`transform_region`]: `F(original) = prefactor * F(params)`,
/// and likewise for the regularized function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transformed {
    pub params: HypParams,
    pub prefactor: Complex64,
    pub region: Region,
}

/// Partial sum of the power series together with the largest term seen,
/// which bounds the cancellation that happened along the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    pub terms: usize,
    pub max_term: f64,
}

impl SeriesSum {
    /// Decimal digits lost to cancellation.
    pub fn digits_lost(&self) -> f64 {
        if self.value.norm() == 0.0 {
            return 0.0;
        }
        (self.max_term / self.value.norm()).log10().max(0.0)
    }
}

fn real_power(base: f64, exponent: Complex64) -> Complex64 {
    (exponent * base.ln()).exp()
}

fn check_argument(x: f64) -> Result<()> {
    if !(x < 1.0) || x.is_nan() {
        return Err(Error::domain(format!("hypergeometric argument {x} must be < 1")));
    }
    Ok(())
}

/// Maps `p` onto an equivalent parameter set with argument in `[0, 1)`.
pub fn transform_region(p: &HypParams) -> Result<Transformed> {
    check_argument(p.x)?;
    let p = p.canonical();
    let HypParams { a, b, c, x } = p;
    // A polynomial is summed as it stands: any prefactor (1-x)^n only adds
    // rounding for x < 0.
    if p.terminating_degree().is_some() {
        return Ok(Transformed { params: p, prefactor: ONE, region: Region::Identity });
    }
    if x < 0.0 {
        // Pull out the parameter that keeps (or makes) the series terminating.
        let pull_b = nonpositive_integer(b, POLE_TOLERANCE).is_some()
            && nonpositive_integer(a, POLE_TOLERANCE).is_none()
            || nonpositive_integer(c - a, POLE_TOLERANCE).is_some()
                && nonpositive_integer(c - b, POLE_TOLERANCE).is_none()
                && nonpositive_integer(a, POLE_TOLERANCE).is_none();
        let (pulled, other) = if pull_b { (b, a) } else { (a, b) };
        let w = x / (x - 1.0);
        return Ok(Transformed {
            params: HypParams::new(pulled, c - other, c, w),
            prefactor: real_power(1.0 - x, -pulled),
            region: Region::Pfaff,
        });
    }
    if x > EULER_FROM
        && p.terminating_degree().is_none()
        && (nonpositive_integer(c - a, POLE_TOLERANCE).is_some()
            || nonpositive_integer(c - b, POLE_TOLERANCE).is_some())
    {
        return Ok(Transformed {
            params: HypParams::new(c - a, c - b, c, x).canonical(),
            prefactor: real_power(1.0 - x, c - a - b),
            region: Region::Euler,
        });
    }
    Ok(Transformed {
        params: p,
        prefactor: ONE,
        region: Region::Identity,
    })
}

/// Direct power-series summation, no argument transformation.
///
/// The regularized series is the plain one times `1 / Gamma(c)`. At
/// `c = -m` the first `m + 1` terms vanish and the remainder is summed as
/// `(a)_{m+1} (b)_{m+1} x^{m+1} / (m+1)! * F(a+m+1, b+m+1; m+2; x)`.
pub fn direct_series(p: &HypParams, regularized: bool) -> Result<SeriesSum> {
    let p = p.canonical();
    let HypParams { a, b, c, x } = p;
    let limit = p.terminating_degree();
    if let Some(m) = nonpositive_integer(c, POLE_TOLERANCE) {
        if limit.map_or(false, |n| n <= m) {
            if regularized {
                return Ok(SeriesSum { value: ZERO, terms: 0, max_term: 0.0 });
            }
            return plain_series(a, b, c, x, limit);
        }
        if !regularized {
            return Err(Error::pole("c", c));
        }
        let mut lead = ONE;
        for j in 0..=m {
            let jf = j as f64;
            lead *= (a + jf) * (b + jf) * x / (jf + 1.0);
        }
        let shift = m as f64 + 1.0;
        let tail = HypParams::new(a + shift, b + shift, Complex64::new(shift + 1.0, 0.0), x);
        let inner = plain_series(tail.a, tail.b, tail.c, x, tail.terminating_degree())?;
        return Ok(SeriesSum {
            value: inner.value * lead,
            terms: inner.terms + m as usize + 1,
            max_term: inner.max_term * lead.norm(),
        });
    }
    let s = plain_series(a, b, c, x, limit)?;
    if !regularized {
        return Ok(s);
    }
    let r = recip_gamma(c);
    Ok(SeriesSum { value: s.value * r, terms: s.terms, max_term: s.max_term * r.norm() })
}

fn plain_series(a: Complex64, b: Complex64, c: Complex64, x: f64, limit: Option<u64>) -> Result<SeriesSum> {
    let mut t = ONE;
    let mut sum = ONE;
    let mut max_term = 1.0f64;
    let mut small_run = 0;
    for k in 0..TERM_BUDGET {
        if let Some(n) = limit {
            if k as u64 >= n {
                return Ok(SeriesSum { value: sum, terms: k + 1, max_term });
            }
        }
        let kf = k as f64;
        t *= (a + kf) * (b + kf) * x / ((c + kf) * (kf + 1.0));
        sum += t;
        let tn = t.norm();
        max_term = max_term.max(tn);
        if !sum.is_finite() {
            return Err(Error::NonConvergence { terms: k + 1 });
        }
        if limit.is_some() {
            continue;
        }
        if tn <= TERM_TOLERANCE * sum.norm() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 && k >= 2 && past_peak(a, b, c, x, k + 1) {
            return Ok(SeriesSum { value: sum, terms: k + 2, max_term });
        }
    }
    Err(Error::NonConvergence { terms: TERM_BUDGET })
}

// True once the term ratio from index k to k+1 is below one and c + k has
// left the region where 1/(c+k) can blow up.
fn past_peak(a: Complex64, b: Complex64, c: Complex64, x: f64, k: usize) -> bool {
    let kf = k as f64;
    if c.re + kf <= 0.0 {
        return false;
    }
    let ratio = ((a + kf) * (b + kf) * x).norm() / ((c + kf).norm() * (kf + 1.0));
    ratio < 1.0
}

fn unit_interval(p: &HypParams, regularized: bool) -> Result<Complex64> {
    if p.x <= DIRECT_LIMIT || p.terminating_degree().is_some() {
        return Ok(direct_series(p, regularized)?.value);
    }
    connection(p, regularized)
}

// F(a,b;c;x)/Gamma(c) = pi/sin(pi s) [ Freg(a,b;1-s;1-x) / (Gamma(c-a) Gamma(c-b))
//                        - (1-x)^s Freg(c-a,c-b;1+s;1-x) / (Gamma(a) Gamma(b)) ],
// s = c - a - b.
fn connection(p: &HypParams, regularized: bool) -> Result<Complex64> {
    let HypParams { a, b, c, x } = *p;
    let s = c - a - b;
    let nearest = Complex64::new(s.re.round(), 0.0);
    if (s - nearest).norm() < DEGENERATE_WIDTH {
        let average = |h: f64| -> Result<Complex64> {
            let up = connection_regular(a + h, b, c, x)?;
            let down = connection_regular(a - h, b, c, x)?;
            Ok((up + down) * 0.5)
        };
        let coarse = average(DEGENERATE_STEP)?;
        let fine = average(0.5 * DEGENERATE_STEP)?;
        let reg = (fine * 4.0 - coarse) / 3.0;
        return if regularized { Ok(reg) } else { Ok(reg * gamma(c)?) };
    }
    let reg = connection_regular(a, b, c, x)?;
    if regularized {
        Ok(reg)
    } else {
        Ok(reg * gamma(c)?)
    }
}

fn connection_regular(a: Complex64, b: Complex64, c: Complex64, x: f64) -> Result<Complex64> {
    let s = c - a - b;
    let y = 1.0 - x;
    let first = direct_series(&HypParams::new(a, b, 1.0 - s, y), true)?.value
        * recip_gamma(c - a)
        * recip_gamma(c - b);
    let second = direct_series(&HypParams::new(c - a, c - b, 1.0 + s, y), true)?.value
        * real_power(y, s)
        * recip_gamma(a)
        * recip_gamma(b);
    Ok((first - second) * PI / sin_pi(s))
}

fn evaluate(p: &HypParams, regularized: bool) -> Result<Complex64> {
    check_argument(p.x)?;
    let p = p.canonical();
    if p.x == 0.0 {
        return Ok(if regularized { recip_gamma(p.c) } else { ONE });
    }
    let t = transform_region(&p)?;
    Ok(t.prefactor * unit_interval(&t.params, regularized)?)
}

/// `2F1(a, b; c; x)`.
pub fn hyp2f1(p: &HypParams) -> Result<Complex64> {
    if nonpositive_integer(p.c, POLE_TOLERANCE).is_some() {
        return Err(Error::pole("c", p.c));
    }
    evaluate(p, false)
}

/// `2F1(a, b; c; x) / Gamma(c)`, analytic in `c`.
pub fn hyp2f1_regularized(p: &HypParams) -> Result<Complex64> {
    evaluate(p, true)
}
