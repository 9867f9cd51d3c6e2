//! Randomized identity checks with a pass/fail report per check.
//!
//! Every check draws from its own ChaCha8 stream (`seed`, stream = index in
//! [`CHECKS`]), so a report depends only on the seed and the check itself
//! and checks can run concurrently.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma::{gamma, gamma_pole, log_gamma, nonpositive_integer, sin_pi};
use crate::hyp2f1::{hyp2f1, hyp2f1_regularized, HypParams};
use crate::legendre::{
    legendre_p_integer, p_at, p_closed_mu_minus_half, p_general, p_negative_order, p_reflected_order,
    q_asymptotic, q_at, q_closed_mu_minus_half, q_general, q_integer_order_degree0, q_via_whipple, rho_from_cosh,
    Argument, EvalPoint, KTauPoint,
};
use crate::norms::{
    collapse_demo, integrand, norm_quadrature, norm_regularized_k0, norm_residue_series, residue_term,
};
use crate::polescan::{
    analytic_residue, cancelled_locations, locate_zero, numeric_residue, predict_poles, KParam, Window,
    DEFAULT_RADIUS, DEFAULT_SAMPLES,
};
use crate::quadrature::{integrate, DEFAULT_MAX_PANELS};
use crate::records::{Field, Record};

/// Every in-scope claim the suite must exercise at least once.
pub const CLAIMS: [&str; 11] = [
    "legendre_ode",
    "hypergeometric_forms",
    "closed_forms",
    "large_argument",
    "exceptional_points",
    "whipple",
    "conical_series_zeros",
    "integer_k_singularity",
    "normalization_integrand",
    "residue_series_collapse",
    "regularized_integral",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    pub name: &'static str,
    /// Parameter ranges, for the report.
    pub sampler: &'static str,
    pub tolerance: f64,
    pub sample_count: usize,
    pub covers: &'static [&'static str],
}

// Singular sets are avoided by a margin of at least 1e-2 except in the
// samples that are explicitly about poles.
pub const CHECKS: [CheckSpec; 13] = [
    CheckSpec {
        name: "gamma_kernel",
        sampler: "|z| <= 50, >= 0.1 from poles; near-pole z = -n + 1e-6 e^{it}, n <= 10",
        tolerance: 1e-11,
        sample_count: 1000,
        covers: &["hypergeometric_forms"],
    },
    CheckSpec {
        name: "hyp2f1_euler",
        sampler: "a, b in [-3,3]x[-2,2]i, c >= 0.1 from poles, x in (-5, 0.9)",
        tolerance: 1e-10,
        sample_count: 500,
        covers: &["hypergeometric_forms"],
    },
    CheckSpec {
        name: "ode",
        sampler: "mu, nu complex or conical K in (-3,3), tau in [0,5]; cosh rho in (1.1, 10); h = 1e-4",
        tolerance: 1e-5,
        sample_count: 200,
        covers: &["legendre_ode", "hypergeometric_forms"],
    },
    CheckSpec {
        name: "closed_form",
        sampler: "mu = -1/2, nu in [-3,3]x[-3,3]i, cosh rho in (1.1, 20)",
        tolerance: 1e-10,
        sample_count: 100,
        covers: &["closed_forms", "hypergeometric_forms"],
    },
    CheckSpec {
        name: "asymptotic",
        sampler: "K in (-1,1), nu in (-1,2)x(-2,2)i; cosh rho = 1e3 and 1e4",
        tolerance: 1e-3,
        sample_count: 20,
        covers: &["large_argument"],
    },
    CheckSpec {
        name: "whipple",
        sampler: "K in (-3,3), tau in [0,5], cosh rho in (1.1, 20)",
        tolerance: 1e-9,
        sample_count: 500,
        covers: &["whipple", "conical_series_zeros"],
    },
    CheckSpec {
        name: "exceptional_points",
        sampler: "K in {-1.5,-1,-0.5,0,0.5,1,1.5,2}, Re nu in (-6,1], |Im nu| <= 1, cosh rho = 2",
        tolerance: 1e-6,
        sample_count: 8,
        covers: &["exceptional_points"],
    },
    CheckSpec {
        name: "zeros",
        sampler: "non-integer K, m = 0,1,2, cosh rho = 1e4",
        tolerance: 1e-6,
        sample_count: 21,
        covers: &["conical_series_zeros"],
    },
    CheckSpec {
        name: "product_identity",
        sampler: "K in (-2,2), tau in (0,5], cosh rho in (1.1, 10)",
        tolerance: 1e-8,
        sample_count: 200,
        covers: &["normalization_integrand"],
    },
    CheckSpec {
        name: "negative_order",
        sampler: "n in 0..=4, nu in (-3,4)x(-2,2)i, z in (1.1, 10)",
        tolerance: 1e-10,
        sample_count: 100,
        covers: &["residue_series_collapse"],
    },
    CheckSpec {
        name: "singular_limit",
        sampler: "m = 0,1,2, cosh rho in {1.5, 2, 5}, eps in {1e-3, 1e-4, 1e-5}",
        tolerance: 1e-6,
        sample_count: 9,
        covers: &["integer_k_singularity"],
    },
    CheckSpec {
        name: "normalization",
        sampler: "K in {-0.4,-0.25,-0.1}, cosh rho in {1.5, 2, 5}",
        tolerance: 1e-6,
        sample_count: 9,
        covers: &["normalization_integrand", "residue_series_collapse"],
    },
    CheckSpec {
        name: "collapse",
        sampler: "eps in [1e-4, 1], cosh rho = 2",
        tolerance: 1e-6,
        sample_count: 5,
        covers: &["residue_series_collapse", "regularized_integral"],
    },
];

/// Claims in [`CLAIMS`] that no check covers.
pub fn coverage_gaps() -> Vec<&'static str> {
    CLAIMS.iter().copied().filter(|c| !CHECKS.iter().any(|s| s.covers.contains(c))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// On the scale of `tolerance`; sub-claims with their own tolerance
    /// are rescaled onto it.
    pub worst_relative_error: f64,
    pub worst_case_inputs: Vec<(String, f64)>,
    pub samples_run: usize,
    pub tolerance: f64,
    /// First few failing samples, with cause.
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn to_record(&self) -> Record {
        let mut inputs = Record::new();
        for (k, v) in &self.worst_case_inputs {
            inputs = inputs.with(k, *v);
        }
        Record::new()
            .with("name", self.name.as_str())
            .with("pass", self.pass)
            .with("worst_relative_error", self.worst_relative_error)
            .with("tolerance", self.tolerance)
            .with("samples_run", self.samples_run)
            .with("worst_case_inputs", inputs)
            .with("failures", Field::Array(self.failures.iter().map(|f| Field::Str(f.clone())).collect()))
    }
}

const MAX_FAILURES: usize = 10;

struct Tracker {
    spec: &'static CheckSpec,
    worst: f64,
    inputs: Vec<(String, f64)>,
    samples: usize,
    failures: Vec<String>,
    failed: usize,
}

impl Tracker {
    fn new(spec: &'static CheckSpec) -> Self {
        Tracker { spec, worst: 0.0, inputs: Vec::new(), samples: 0, failures: Vec::new(), failed: 0 }
    }

    fn sample(&mut self, label: &str, inputs: &[(&str, f64)], f: impl FnOnce() -> Result<f64>) {
        self.claim(label, self.spec.tolerance, inputs, f)
    }

    /// A sub-claim with tolerance `tol`; its error is reported as
    /// `err * spec.tolerance / tol`.
    fn claim(&mut self, label: &str, tol: f64, inputs: &[(&str, f64)], f: impl FnOnce() -> Result<f64>) {
        self.samples += 1;
        let (err, cause) = match f() {
            Ok(e) if e.is_nan() => (f64::INFINITY, "NaN error".to_string()),
            Ok(e) => (e, format!("error {e:.3e} > {tol:.1e}")),
            Err(e) => (f64::INFINITY, e.to_string()),
        };
        let scaled = err * (self.spec.tolerance / tol);
        if scaled > self.worst || (self.inputs.is_empty() && self.samples == 1) {
            self.worst = self.worst.max(scaled);
            self.inputs = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        }
        if !(scaled <= self.spec.tolerance) {
            self.failed += 1;
            if self.failures.len() < MAX_FAILURES {
                let args: Vec<String> = inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
                self.failures.push(format!("{label} [{}]: {cause}", args.join(", ")));
            }
        }
    }

    fn finish(self) -> CheckReport {
        let pass = self.failed == 0 && self.worst <= self.spec.tolerance;
        CheckReport {
            name: self.spec.name.to_string(),
            pass,
            worst_relative_error: self.worst,
            worst_case_inputs: self.inputs,
            samples_run: self.samples,
            tolerance: self.spec.tolerance,
            failures: self.failures,
        }
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn rel_real(a: f64, b: f64) -> f64 {
    rel(a.into(), b.into())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn near_pole(z: Complex64, margin: f64) -> bool {
    nonpositive_integer(z, margin).is_some()
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn spec(name: &str) -> &'static CheckSpec {
    CHECKS.iter().find(|s| s.name == name).expect("check declared in CHECKS")
}

fn check_gamma_kernel(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("gamma_kernel"));
    for _ in 0..t.spec.sample_count {
        let z = loop {
            let z = c(uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0));
            let on_axis = z.im.abs() < 0.1 && (z.re - z.re.round()).abs() < 0.1;
            if z.norm() <= 50.0 && !on_axis {
                break z;
            }
        };
        let inputs = [("re_z", z.re), ("im_z", z.im)];
        t.claim("recurrence", 1e-12, &inputs, || Ok(rel(gamma(z + 1.0)?, z * gamma(z)?)));
        t.sample("reflection", &inputs, || {
            Ok((gamma(z)? * gamma(1.0 - z)? * sin_pi(z) / PI - 1.0).norm())
        });
        t.claim("conjugation", f64::EPSILON, &inputs, || Ok(rel(gamma(z.conj())?, gamma(z)?.conj())));
        t.claim("log_gamma", 1e-10, &inputs, || {
            let lg = log_gamma(z)?.exp();
            Ok(rel(lg, gamma(z)?))
        });
    }
    for n in 0..=10u64 {
        let theta = uniform(rng, 0.0, 2.0 * PI);
        let d = Complex64::from_polar(1e-6, theta);
        let z = d - n as f64;
        t.claim("near_pole", 1e-5, &[("n", n as f64), ("theta", theta)], || {
            Ok(rel(d * gamma(z)?, gamma_pole(n).residue.into()))
        });
    }
    t.finish()
}

fn real_power(base: f64, exponent: Complex64) -> Complex64 {
    (exponent * base.ln()).exp()
}

fn check_hyp2f1_euler(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("hyp2f1_euler"));
    let param = |rng: &mut ChaCha8Rng| c(uniform(rng, -3.0, 3.0), uniform(rng, -2.0, 2.0));
    for _ in 0..t.spec.sample_count {
        let a = param(rng);
        let b = param(rng);
        let cc = loop {
            let cc = param(rng);
            if !near_pole(cc, 0.1) {
                break cc;
            }
        };
        let x = uniform(rng, -5.0, 0.9);
        let inputs =
            [("re_a", a.re), ("im_a", a.im), ("re_b", b.re), ("im_b", b.im), ("re_c", cc.re), ("im_c", cc.im), ("x", x)];
        t.sample("euler", &inputs, || {
            let lhs = hyp2f1(&HypParams::new(a, b, cc, x))?;
            let rhs = real_power(1.0 - x, cc - a - b) * hyp2f1(&HypParams::new(cc - a, cc - b, cc, x))?;
            Ok(rel(lhs, rhs))
        });
        t.sample("symmetry", &inputs, || {
            let p = HypParams::new(a, b, cc, x);
            let q = HypParams::new(b, a, cc, x);
            let same = hyp2f1(&p)? == hyp2f1(&q)? && hyp2f1_regularized(&p)? == hyp2f1_regularized(&q)?;
            Ok(if same { 0.0 } else { f64::INFINITY })
        });
    }
    for n in 0..=10u32 {
        let b = param(rng);
        let cc = c(uniform(rng, 0.5, 3.0), uniform(rng, -2.0, 2.0));
        let x = uniform(rng, -5.0, 0.9);
        t.claim("terminating", 1e-13, &[("n", n as f64), ("x", x)], || {
            let a = -(n as f64);
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            let mut size = 1.0;
            for j in 0..n {
                let jf = j as f64;
                term *= (a + jf) * (b + jf) * x / ((cc + jf) * (jf + 1.0));
                sum += term;
                size += term.norm();
            }
            Ok((hyp2f1(&HypParams::new(a.into(), b, cc, x))? - sum).norm() / size)
        });
    }
    for m in 0..=2u32 {
        let a = param(rng);
        let b = param(rng);
        let x = uniform(rng, -2.0, 0.9);
        let pole = -(m as f64);
        t.claim("regularized_continuity", 1e-8, &[("m", m as f64), ("re_a", a.re), ("im_a", a.im), ("re_b", b.re), ("im_b", b.im), ("x", x)], || {
            let at = |cc: f64| hyp2f1_regularized(&HypParams::new(a, b, cc.into(), x));
            // One-sided limits by linear extrapolation from d and 2d.
            let d = 1e-6;
            let lo = at(pole - d)? * 2.0 - at(pole - 2.0 * d)?;
            let hi = at(pole + d)? * 2.0 - at(pole + 2.0 * d)?;
            let mid = at(pole)?;
            let scale = mid.norm().max(1e-300);
            Ok((lo - hi).norm().max((lo - mid).norm()).max((hi - mid).norm()) / scale)
        });
    }
    t.finish()
}

/// `w'' + coth(rho) w' - mu^2 w / sinh^2(rho) - nu(nu+1) w` by central
/// differences in `rho`, over the largest of the four terms.
fn ode_residual(
    f: impl Fn(f64) -> Result<Complex64>,
    mu: Complex64,
    nu: Complex64,
    rho: f64,
    h: f64,
) -> Result<f64> {
    if rho < 3.0 * h {
        return Err(Error::domain(format!("rho = {rho} below 3h")));
    }
    let (wm, w0, wp) = (f(rho - h)?, f(rho)?, f(rho + h)?);
    let d2 = (wp - 2.0 * w0 + wm) / (h * h);
    let d1 = (wp - wm) / (2.0 * h);
    let s = rho.sinh();
    let terms = [d2, d1 / rho.tanh(), -mu * mu * w0 / (s * s), -nu * (nu + 1.0) * w0];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let sum: Complex64 = terms.iter().sum();
    Ok(if scale == 0.0 { 0.0 } else { sum.norm() / scale })
}

fn check_ode(rng: &mut ChaCha8Rng) -> CheckReport {
    const H: f64 = 1e-4;
    let mut t = Tracker::new(spec("ode"));
    let p_of = |mu: Complex64, nu: Complex64| move |r: f64| p_at(mu, nu, &Argument::cosh(r)?);
    let q_of = |mu: Complex64, nu: Complex64| move |r: f64| q_at(mu, nu, &Argument::cosh(r)?);
    for i in 0..t.spec.sample_count {
        let (mu, nu) = loop {
            let (mu, nu) = if i % 2 == 0 {
                (c(uniform(rng, -3.0, 3.0), uniform(rng, -1.0, 1.0)), c(uniform(rng, -3.0, 2.0), uniform(rng, -3.0, 3.0)))
            } else {
                (c(-0.5 - uniform(rng, -3.0, 3.0), 0.0), c(-0.5, uniform(rng, 0.0, 5.0)))
            };
            if !near_pole(nu + mu + 1.0, 1e-2) {
                break (mu, nu);
            }
        };
        let rho = rho_from_cosh(uniform(rng, 1.1, 10.0)).expect("cosh rho > 1");
        let inputs = [("re_mu", mu.re), ("im_mu", mu.im), ("re_nu", nu.re), ("im_nu", nu.im), ("rho", rho)];
        t.sample("P", &inputs, || ode_residual(p_of(mu, nu), mu, nu, rho, H));
        t.sample("Q", &inputs, || ode_residual(q_of(mu, nu), mu, nu, rho, H));
    }
    // The conical sample and eigenvalue -1/4 - tau^2.
    let (k, tau, rho) = (0.3, 1.2, rho_from_cosh(2.0).expect("cosh rho > 1"));
    let (mu, nu) = (c(-0.5 - k, 0.0), c(-0.5, tau));
    let inputs = [("k", k), ("tau", tau), ("rho", rho)];
    t.sample("conical_P", &inputs, || ode_residual(p_of(mu, nu), mu, nu, rho, H));
    t.sample("conical_Q", &inputs, || ode_residual(q_of(mu, nu), mu, nu, rho, H));
    // mu = -1/2 closed form: w'/w = -coth/2 - (nu+1/2), w''/w = (w'/w)^2 + csch^2/2.
    for _ in 0..10 {
        let nu = c(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
        let rho = rho_from_cosh(uniform(rng, 1.1, 10.0)).expect("cosh rho > 1");
        let inputs = [("re_nu", nu.re), ("im_nu", nu.im), ("rho", rho)];
        t.claim("closed_form_analytic", 1e-8, &inputs, || {
            let (s, ct) = (rho.sinh(), 1.0 / rho.tanh());
            let g = -0.5 * ct - (nu + 0.5);
            let terms = [g * g + 0.5 / (s * s), g * ct, c(-0.25 / (s * s), 0.0), -nu * (nu + 1.0)];
            let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
            Ok(terms.iter().sum::<Complex64>().norm() / scale)
        });
        t.sample("closed_form_difference", &inputs, || {
            ode_residual(|r| q_closed_mu_minus_half(nu, r), c(-0.5, 0.0), nu, rho, H)
        });
    }
    // P^0_1 = z.
    let rho = rho_from_cosh(uniform(rng, 1.1, 10.0)).expect("cosh rho > 1");
    t.claim("P_equals_z", 1e-13, &[("rho", rho)], || {
        Ok(rel_real(p_general(&EvalPoint::new(0.0.into(), 1.0.into(), rho)?)?.re, rho.cosh()))
    });
    t.sample("P_equals_z_residual", &[("rho", rho)], || ode_residual(p_of(0.0.into(), 1.0.into()), 0.0.into(), 1.0.into(), rho, H));
    t.finish()
}

fn check_closed_form(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("closed_form"));
    let mu = c(-0.5, 0.0);
    for _ in 0..t.spec.sample_count {
        let nu = loop {
            let nu = c(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
            if !near_pole(nu + 0.5, 1e-2) {
                break nu;
            }
        };
        let rho = rho_from_cosh(uniform(rng, 1.1, 20.0)).expect("cosh rho > 1");
        let inputs = [("re_nu", nu.re), ("im_nu", nu.im), ("rho", rho)];
        t.sample("Q", &inputs, || {
            Ok(rel(q_general(&EvalPoint::new(mu, nu, rho)?)?, q_closed_mu_minus_half(nu, rho)?))
        });
        t.sample("P", &inputs, || {
            Ok(rel(p_general(&EvalPoint::new(mu, nu, rho)?)?, p_closed_mu_minus_half(nu, rho)?))
        });
    }
    let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
    let want_q = c(0.0, -0.985909);
    t.claim("Q_value", 1e-5, &[("nu", 0.0), ("cosh_rho", 2.0)], || {
        let closed = q_closed_mu_minus_half(0.0.into(), rho)?;
        let general = q_general(&EvalPoint::new(mu, 0.0.into(), rho)?)?;
        Ok((closed - want_q).norm().max((general - want_q).norm()))
    });
    t.claim("P_value", 1e-6, &[("nu", 0.0), ("cosh_rho", 2.0)], || {
        let closed = p_closed_mu_minus_half(0.0.into(), rho)?;
        Ok((closed - 0.857382).norm())
    });
    t.claim("P_at_minus_half", 1e-12, &[("cosh_rho", 2.0)], || {
        let series = p_closed_mu_minus_half(c(-0.5, 0.0), rho)?;
        let want = (2.0 * rho * rho / (PI * rho.sinh())).sqrt();
        Ok(rel(series, want.into()))
    });
    t.finish()
}

fn check_asymptotic(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("asymptotic"));
    for _ in 0..t.spec.sample_count {
        let (k, nu) = loop {
            let k = uniform(rng, -1.0, 1.0);
            let nu = c(uniform(rng, -1.0, 2.0), uniform(rng, -2.0, 2.0));
            if !near_pole(nu + 0.5 - k, 0.05) && !near_pole(nu + 1.5, 0.05) {
                break (k, nu);
            }
        };
        for (cosh_rho, tol) in [(1e3, 1e-3), (1e4, 1e-5)] {
            let inputs = [("k", k), ("re_nu", nu.re), ("im_nu", nu.im), ("cosh_rho", cosh_rho)];
            t.claim("ratio", tol, &inputs, || {
                let rho = rho_from_cosh(cosh_rho)?;
                let q = q_general(&EvalPoint::new(c(-0.5 - k, 0.0), nu, rho)?)?;
                Ok((q / q_asymptotic(k, nu, rho)? - 1.0).norm())
            });
        }
    }
    t.finish()
}

fn whipple_rel(k: f64, nu: Complex64, rho: f64) -> Result<f64> {
    let direct = q_general(&EvalPoint::new(c(-0.5 - k, 0.0), nu, rho)?)?;
    let whipple = q_via_whipple(k, nu, rho)?;
    if !direct.is_finite() || !whipple.is_finite() {
        return Err(Error::domain("non-finite value"));
    }
    Ok(rel(direct, whipple))
}

fn check_whipple(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("whipple"));
    for _ in 0..t.spec.sample_count {
        let (k, tau) = loop {
            let k = uniform(rng, -3.0, 3.0);
            let tau = uniform(rng, 0.0, 5.0);
            if !near_pole(c(-k, tau), 1e-2) {
                break (k, tau);
            }
        };
        let rho = rho_from_cosh(uniform(rng, 1.1, 20.0)).expect("cosh rho > 1");
        t.sample("conical", &[("k", k), ("tau", tau), ("rho", rho)], || whipple_rel(k, c(-0.5, tau), rho));
    }
    let rho2 = rho_from_cosh(2.0).expect("cosh rho > 1");
    t.claim("k0_nu0", 1e-10, &[("k", 0.0), ("nu", 0.0)], || whipple_rel(0.0, 0.0.into(), rho2));
    // K = -1 has no poles: both sides finite on a real-nu grid through the
    // cancelled sites and along the conical line.
    for j in 0..=28 {
        let nu = -6.0 + 0.25 * j as f64;
        t.sample("k_minus_one_real", &[("k", -1.0), ("nu", nu)], || whipple_rel(-1.0, nu.into(), rho2));
    }
    for j in 0..=10 {
        let tau = 0.5 * j as f64;
        t.sample("k_minus_one_conical", &[("k", -1.0), ("tau", tau)], || whipple_rel(-1.0, c(-0.5, tau), rho2));
    }
    let k = 0.3;
    let nu = k - 0.5 + 1e-3;
    t.claim("near_pole", 1e-6, &[("k", k), ("nu", nu)], || whipple_rel(k, nu.into(), rho2));
    t.finish()
}

const EP_KS: [f64; 8] = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

fn check_exceptional_points(_rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("exceptional_points"));
    let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
    let window = Window::default();
    for k in EP_KS {
        let kp = KParam::detect(k);
        let predicted = match predict_poles(kp, &window, rho) {
            Ok(p) => p,
            Err(e) => {
                t.sample("predict", &[("k", k)], || Err(e));
                continue;
            }
        };
        for p in &predicted {
            let inputs = [("k", k), ("nu", p.nu_location.re)];
            t.sample("residue", &inputs, || {
                let n = numeric_residue(k, p.nu_location, rho, DEFAULT_RADIUS, DEFAULT_SAMPLES)?;
                if n.unconverged {
                    return Err(Error::domain("contour sample counts disagree"));
                }
                Ok((n.residue - p.residue).norm() / p.residue.norm())
            });
            t.claim("location", 1e-6, &inputs, || {
                let n = p.n as f64;
                Ok((p.nu_location - c(k - 0.5 - n, 0.0)).norm())
            });
        }
        for (n, nu0) in cancelled_locations(kp, &window) {
            t.claim("cancelled", 1e-9, &[("k", k), ("n", n as f64)], || {
                Ok(numeric_residue(k, nu0, rho, DEFAULT_RADIUS, DEFAULT_SAMPLES)?.residue.norm())
            });
        }
        // Independent enumeration: K - 1/2 - n in the window, all n for
        // non-integer K, n <= 2K for integer K >= 0, none for negative K.
        t.sample("pole_count", &[("k", k)], || {
            let expected = (0..64u64)
                .filter(|&n| window.contains(c(k - 0.5 - n as f64, 0.0)))
                .filter(|&n| match kp {
                    KParam::Integer(j) => j >= 0 && n <= 2 * j as u64,
                    KParam::Real(_) => true,
                })
                .count();
            Ok(if predicted.len() == expected { 0.0 } else { f64::INFINITY })
        });
    }
    t.finish()
}

const ZERO_KS: [f64; 7] = [-1.5, -0.7, -0.5, 0.3, 0.5, 1.5, 2.25];

fn check_zeros(_rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("zeros"));
    let rho = rho_from_cosh(1e4).expect("cosh rho > 1");
    for k in ZERO_KS {
        for m in 0..3u32 {
            t.sample("zero", &[("k", k), ("m", m as f64)], || {
                Ok((locate_zero(k, m, rho)? - (-1.5 - m as f64)).abs())
            });
        }
    }
    t.finish()
}

fn product_rel(k: f64, tau: f64, rho: f64) -> Result<(f64, f64)> {
    let q = q_general(&KTauPoint::new(k, tau, rho)?.eval_point())?;
    let v = integrand(k, tau, rho)?;
    Ok((rel_real(v.value, q.norm_sqr()), (v.imag_residual / v.value).abs()))
}

fn check_product_identity(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("product_identity"));
    for _ in 0..t.spec.sample_count {
        let (k, tau) = loop {
            let k = uniform(rng, -2.0, 2.0);
            let tau = uniform(rng, 0.0, 5.0);
            if !near_pole(c(-k, tau), 1e-2) && tau > 0.0 {
                break (k, tau);
            }
        };
        let rho = rho_from_cosh(uniform(rng, 1.1, 10.0)).expect("cosh rho > 1");
        let inputs = [("k", k), ("tau", tau), ("rho", rho)];
        t.sample("modulus", &inputs, || Ok(product_rel(k, tau, rho)?.0));
        t.claim("realness", 1e-9, &inputs, || Ok(product_rel(k, tau, rho)?.1));
        t.sample("positive", &inputs, || {
            Ok(if integrand(k, tau, rho)?.value > 0.0 { 0.0 } else { f64::INFINITY })
        });
    }
    for tau in [0.1, 1.0, 4.0] {
        let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
        t.sample("k0_exact", &[("tau", tau)], || {
            let want = PI / (2.0 * rho.sinh() * tau * tau);
            let q = q_general(&KTauPoint::new(0.0, tau, rho)?.eval_point())?.norm_sqr();
            Ok(rel_real(integrand(0.0, tau, rho)?.value, want).max(rel_real(q, want)))
        });
    }
    let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
    t.sample("tau_zero_limit", &[("k", -0.25), ("tau", 0.0)], || {
        let at_zero = integrand(-0.25, 0.0, rho)?.value;
        let near = integrand(-0.25, 1e-9, rho)?.value;
        let (direct, _) = product_rel(-0.25, 0.0, rho)?;
        Ok(direct.max(rel_real(at_zero, near)))
    });
    t.finish()
}

fn check_negative_order(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("negative_order"));
    for _ in 0..t.spec.sample_count {
        let n = rng.gen_range(0..=4u32);
        let nu = c(uniform(rng, -3.0, 4.0), uniform(rng, -2.0, 2.0));
        let z = uniform(rng, 1.1, 10.0);
        let inputs = [("n", n as f64), ("re_nu", nu.re), ("im_nu", nu.im), ("z", z)];
        t.sample("integer_order", &inputs, || {
            Ok(rel(p_negative_order(n, nu, z)?, p_at(Complex64::from(-(n as f64)), nu, &Argument::value(z)?)?))
        });
        // The sin(n pi) factor is exactly zero, so the Q term contributes nothing.
        t.claim("sin_suppression", 1e-12, &inputs, || {
            let s = sin_pi((n as f64).into()).norm();
            let q = q_at((n as f64).into(), nu, &Argument::value(z)?).map(|q| q.norm()).unwrap_or(1.0);
            let p = p_negative_order(n, nu, z)?.norm().max(1e-300);
            Ok((2.0 / PI) * s * q / p)
        });
        let mu = loop {
            let mu = c(uniform(rng, -3.0, 3.0), uniform(rng, -1.0, 1.0));
            if !near_pole(nu - mu + 1.0, 1e-2) && !near_pole(nu + mu + 1.0, 1e-2) {
                break mu;
            }
        };
        let inputs = [("re_mu", mu.re), ("im_mu", mu.im), ("re_nu", nu.re), ("im_nu", nu.im), ("z", z)];
        t.sample("reflected_order", &inputs, || {
            Ok(rel(p_reflected_order(mu, nu, z)?, p_at(-mu, nu, &Argument::value(z)?)?))
        });
    }
    t.sample("n0_identity", &[("nu", 1.7), ("z", 3.0)], || {
        let nu = c(1.7, 0.4);
        Ok(rel(p_negative_order(0, nu, 3.0)?, p_at(0.0.into(), nu, &Argument::value(3.0)?)?))
    });
    t.sample("n2_nu3.3_z2", &[("n", 2.0), ("nu", 3.3), ("z", 2.0)], || {
        Ok(rel(p_negative_order(2, 3.3.into(), 2.0)?, p_at(c(-2.0, 0.0), 3.3.into(), &Argument::value(2.0)?)?))
    });
    for z in [1.5, 2.0, 7.0] {
        t.sample("p_minus_one_degree0", &[("z", z)], || {
            Ok(rel(p_negative_order(1, 0.0.into(), z)?, ((z - 1.0) / (z + 1.0)).sqrt().into()))
        });
        for n in 0..=5u32 {
            t.sample("q_degree0", &[("n", n as f64), ("z", z)], || {
                let direct = q_at((n as f64).into(), 0.0.into(), &Argument::value(z)?)?;
                Ok(rel(q_integer_order_degree0(n, z)?.into(), direct))
            });
            if n >= 1 {
                t.claim("p_degree0_zero", 1e-14, &[("n", n as f64), ("z", z)], || {
                    Ok(p_at((n as f64).into(), 0.0.into(), &Argument::value(z)?)?.norm())
                });
            }
        }
    }
    t.finish()
}

/// `lim_{K->m} (K-m) Q^{-1/2-K}_{-1/2}(cosh rho)
///  = -i e^{-i m pi} sqrt(pi/(2 sinh rho)) (-(-1)^m/m!) P_m(coth rho)`.
fn singular_limit(m: u32, rho: f64) -> Complex64 {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let fact: f64 = (1..=m).map(f64::from).product();
    let amp = (PI / (2.0 * rho.sinh())).sqrt();
    -Complex64::i() * sign * amp * (-sign / fact) * legendre_p_integer(m, 1.0 / rho.tanh())
}

fn check_singular_limit(_rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("singular_limit"));
    let nu = c(-0.5, 0.0);
    for m in 0..=2u32 {
        for cosh_rho in [1.5, 2.0, 5.0] {
            let rho = rho_from_cosh(cosh_rho).expect("cosh rho > 1");
            t.sample("limit", &[("m", m as f64), ("cosh_rho", cosh_rho)], || {
                // Averaging K = m +- eps removes the odd powers of eps.
                let sym = |eps: f64| -> Result<Complex64> {
                    let at = |k: f64| q_general(&EvalPoint::new(c(-0.5 - k, 0.0), nu, rho)?);
                    Ok(0.5 * eps * (at(m as f64 + eps)? - at(m as f64 - eps)?))
                };
                let s: Vec<Complex64> = [1e-3, 1e-4, 1e-5].into_iter().map(sym).collect::<Result<_>>()?;
                let limit = (100.0 * s[2] - s[1]) / 99.0;
                let want = singular_limit(m, rho);
                if limit.norm() == 0.0 {
                    return Err(Error::domain("vanishing limit"));
                }
                Ok(rel(limit, want).max(rel((100.0 * s[1] - s[0]) / 99.0, want) * 1e-3))
            });
        }
    }
    let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
    t.sample("k_minus_one_finite", &[("k", -1.0)], || whipple_rel(-1.0, nu, rho));
    t.finish()
}

fn check_normalization(_rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("normalization"));
    for k in [-0.4, -0.25, -0.1] {
        for cosh_rho in [1.5, 2.0, 5.0] {
            let rho = rho_from_cosh(cosh_rho).expect("cosh rho > 1");
            let inputs = [("k", k), ("cosh_rho", cosh_rho)];
            let quad = norm_quadrature(k, rho, 1e-10);
            let series = norm_residue_series(k, rho, 1e-10, false);
            t.sample("methods_agree", &inputs, || {
                let (q, s) = (quad.clone()?, series.clone()?);
                Ok((q.value - s.value).abs() / q.value)
            });
            t.claim("positive_real", 1e-9, &inputs, || {
                let (q, s) = (quad.clone()?, series.clone()?);
                if !(q.value > 0.0 && s.value > 0.0) {
                    return Ok(f64::INFINITY);
                }
                Ok(q.imag_residual.max(s.imag_residual))
            });
        }
    }
    // Relative error of the leading large-tau form on [T, 4T], against T^-2.
    for k in [-0.25, 0.3] {
        let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
        for cut in [20.0, 40.0] {
            t.claim("tail_scaling", 1.0, &[("k", k), ("tail_cut", cut)], || {
                let numeric = integrate(|tau| Ok(integrand(k, tau, rho)?.value), cut, 4.0 * cut, 0.0, 1e-13, DEFAULT_MAX_PANELS)?;
                let p = 2.0 + 2.0 * k;
                let amp = PI / (2.0 * rho.sinh());
                let form = amp * (cut.powf(1.0 - p) - (4.0 * cut).powf(1.0 - p)) / (p - 1.0);
                Ok((numeric.value - form).abs() / numeric.value * cut * cut)
            });
        }
    }
    t.finish()
}

fn check_collapse(_rng: &mut ChaCha8Rng) -> CheckReport {
    let mut t = Tracker::new(spec("collapse"));
    let rho = rho_from_cosh(2.0).expect("cosh rho > 1");
    for eps in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
        t.sample("regularized", &[("epsilon", eps)], || {
            let r = norm_regularized_k0(rho, eps)?;
            Ok((r.numeric.value - r.analytic).abs() / r.analytic)
        });
    }
    let rows = collapse_demo(rho, &[1e-3, 1e-4]);
    for (i, (eps, tol)) in [(1e-3, 5e-3), (1e-4, 5e-4)].into_iter().enumerate() {
        t.claim("epsilon_scaling", tol, &[("epsilon", eps)], || Ok((rows.clone()?[i].ratio - 1.0).abs()));
    }
    t.claim("tail_fraction", 1e-3, &[("epsilon", 1e-4)], || {
        let row = rows.clone()?[1];
        Ok((row.tail / row.n0_term).abs())
    });
    // K = -10^-j: n = 1 residue shrinks, n = 0 residue approaches its K = 0 value.
    t.sample("residue_trend", &[("cosh_rho", 2.0)], || {
        let base = analytic_residue(0.0, 0, rho)?;
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for j in 2..=6 {
            let k = -(10f64.powi(-j));
            let r1 = analytic_residue(k, 1, rho)?.norm();
            let d0 = (analytic_residue(k, 0, rho)? - base).norm();
            if !(r1 < prev.0 && d0 < prev.1) {
                return Ok(f64::INFINITY);
            }
            prev = (r1, d0);
        }
        Ok(0.0)
    });
    t.sample("series_term_trend", &[("cosh_rho", 2.0)], || {
        let mut prev = f64::INFINITY;
        for j in 2..=6 {
            let v = residue_term(-(10f64.powi(-j)), 1, rho)?.norm();
            if !(v < prev) {
                return Ok(f64::INFINITY);
            }
            prev = v;
        }
        Ok(0.0)
    });
    t.finish()
}

fn run_check(index: usize, seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, index);
    let f = match CHECKS[index].name {
        "gamma_kernel" => check_gamma_kernel,
        "hyp2f1_euler" => check_hyp2f1_euler,
        "ode" => check_ode,
        "closed_form" => check_closed_form,
        "asymptotic" => check_asymptotic,
        "whipple" => check_whipple,
        "exceptional_points" => check_exceptional_points,
        "zeros" => check_zeros,
        "product_identity" => check_product_identity,
        "negative_order" => check_negative_order,
        "singular_limit" => check_singular_limit,
        "normalization" => check_normalization,
        "collapse" => check_collapse,
        other => unreachable!("no runner for check {other}"),
    };
    f(&mut rng)
}

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|s| s.name).collect()
}

/// Runs the checks whose name contains `filter` (all when `None`), in
/// parallel, returning reports in declaration order.
pub fn run_suite(filter: Option<&str>, seed: u64) -> Result<Vec<CheckReport>> {
    let gaps = coverage_gaps();
    if !gaps.is_empty() {
        return Err(Error::domain(format!("claims without a check: {}", gaps.join(", "))));
    }
    let selected: Vec<usize> = (0..CHECKS.len())
        .filter(|&i| filter.map_or(true, |f| CHECKS[i].name.contains(f)))
        .collect();
    if selected.is_empty() {
        return Err(Error::domain(format!(
            "no check matches '{}'; available: {}",
            filter.unwrap_or(""),
            check_names().join(", ")
        )));
    }
    Ok(selected.into_par_iter().map(|i| run_check(i, seed)).collect())
}

pub fn run_one(name: &str, seed: u64) -> Result<CheckReport> {
    let index = CHECKS
        .iter()
        .position(|s| s.name == name)
        .ok_or_else(|| Error::domain(format!("unknown check '{name}'")))?;
    Ok(run_check(index, seed))
}

/// Fixed-width table, one line per report.
pub fn summary_table(reports: &[CheckReport]) -> String {
    let mut out = format!("{:<20} {:<4} {:>12} {:>10} {:>8}\n", "check", "ok", "worst", "tolerance", "samples");
    for r in reports {
        out.push_str(&format!(
            "{:<20} {:<4} {:>12.3e} {:>10.1e} {:>8}\n",
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.worst_relative_error,
            r.tolerance,
            r.samples_run
        ));
        for f in &r.failures {
            out.push_str(&format!("    {f}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_claim_covered() {
        assert!(coverage_gaps().is_empty());
        for s in &CHECKS {
            assert!(s.tolerance > 0.0 && s.sample_count >= 1);
        }
    }

    #[test]
    fn tracker_rescales_and_flags() {
        static SPEC: CheckSpec = CheckSpec { name: "t", sampler: "", tolerance: 1e-6, sample_count: 1, covers: &[] };
        let mut t = Tracker::new(&SPEC);
        t.claim("sub", 1e-3, &[("x", 1.0)], || Ok(5e-4));
        let r = t.finish();
        assert!(r.pass);
        assert!((r.worst_relative_error - 5e-7).abs() < 1e-18);
        let mut t = Tracker::new(&SPEC);
        t.sample("bad", &[("x", 2.0)], || Err(Error::domain("boom")));
        let r = t.finish();
        assert!(!r.pass);
        assert_eq!(r.worst_relative_error, f64::INFINITY);
        assert_eq!(r.worst_case_inputs, vec![("x".to_string(), 2.0)]);
        assert!(r.failures[0].contains("boom"));
    }

    #[test]
    fn unknown_filter_rejected() {
        let err = run_suite(Some("nonexistent"), 0).unwrap_err();
        assert!(err.to_string().contains("whipple"));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = run_one("closed_form", 3).unwrap();
        let b = run_one("closed_form", 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singular_limit_m0() {
        // -i sqrt(pi/(2 sinh rho)) * (-1) * P_0 = i sqrt(pi/(2 sinh rho))
        let rho = 1.0;
        let l = singular_limit(0, rho);
        assert!((l - Complex64::new(0.0, (PI / (2.0 * rho.sinh())).sqrt())).norm() < 1e-15);
    }
}
