use std::f64::consts::PI;

use legendre_ep::hyp2f1::{hyp2f1, hyp2f1_regularized, HypParams};
use legendre_ep::legendre::{p_at, q_general, q_via_whipple, Argument, EvalPoint, KTauPoint};
use legendre_ep::norms::{integrand, norm_regularized_k0};
use legendre_ep::polescan::{classify_exceptional, predict_poles, EpKind, KParam, Window};
use legendre_ep::records::{pole_record, Record};
use legendre_ep::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn off_poles(z: Complex64) -> bool {
    z.im.abs() > 1e-2 || z.re > 1e-2 || (z.re - z.re.round()).abs() > 1e-2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn terminating_series_is_a_polynomial(
        n in 0u32..12,
        b in (-3.0f64..3.0, -2.0f64..2.0),
        cc in (0.5f64..4.0, -2.0f64..2.0),
        x in -8.0f64..0.95,
    ) {
        let (a, b, cc) = (c(-(n as f64), 0.0), c(b.0, b.1), c(cc.0, cc.1));
        let got = hyp2f1(&HypParams::new(a, b, cc, x)).unwrap();
        let mut term = c(1.0, 0.0);
        let mut sum = term;
        let mut scale = 1.0f64;
        for j in 0..n {
            let j = j as f64;
            term *= (a + j) * (b + j) / ((cc + j) * (j + 1.0)) * x;
            sum += term;
            scale = scale.max(term.norm());
        }
        prop_assert!((got - sum).norm() <= 1e-12 * scale.max(sum.norm()), "{got} vs {sum}");
    }

    #[test]
    fn regularized_series_is_continuous_in_c(
        m in 0u32..4,
        a in (-2.0f64..2.0, -1.0f64..1.0),
        b in (-2.0f64..2.0, -1.0f64..1.0),
        x in -0.8f64..0.8,
    ) {
        let (a, b) = (c(a.0, a.1), c(b.0, b.1));
        let at = |cc: f64| hyp2f1_regularized(&HypParams::new(a, b, c(cc, 0.0), x)).unwrap();
        let center = at(-(m as f64));
        let d = 1e-6;
        let left = at(-(m as f64) - d) * 2.0 - at(-(m as f64) - 2.0 * d);
        let right = at(-(m as f64) + d) * 2.0 - at(-(m as f64) + 2.0 * d);
        let scale = center.norm().max(1e-3);
        prop_assert!((left - center).norm() <= 1e-6 * scale);
        prop_assert!((right - center).norm() <= 1e-6 * scale);
    }

    #[test]
    fn whipple_matches_direct_q(k in -3.0f64..3.0, tau in 0.0f64..5.0, cosh_rho in 1.05f64..50.0) {
        prop_assume!(off_poles(c(-k, tau)));
        let pt = KTauPoint::new(k, tau, cosh_rho.acosh()).unwrap();
        let direct = q_general(&pt.eval_point()).unwrap();
        let whipple = q_via_whipple(k, pt.nu(), pt.rho).unwrap();
        prop_assert!(rel(direct, whipple) <= 1e-9);
    }

    #[test]
    fn normalization_integrand_is_real_and_nonnegative(
        k in -0.49f64..-0.01,
        tau in 0.0f64..15.0,
        cosh_rho in 1.1f64..20.0,
    ) {
        let v = integrand(k, tau, cosh_rho.acosh()).unwrap();
        prop_assert!(v.value >= 0.0);
        prop_assert!(v.imag_residual.abs() <= 1e-10 * v.value.max(1e-300));
    }

    #[test]
    fn p_has_no_poles_in_nu(
        mu in (-3.0f64..3.0, -1.0f64..1.0),
        nu_re in -6.0f64..6.0,
        nu_im in -1.0f64..1.0,
        z in 1.01f64..30.0,
    ) {
        let arg = Argument::value(z).unwrap();
        let v = p_at(c(mu.0, mu.1), c(nu_re, nu_im), &arg);
        prop_assert!(matches!(v, Ok(w) if w.re.is_finite() && w.im.is_finite()), "{v:?}");
    }

    #[test]
    fn p_is_finite_on_the_real_pole_lattice(n in 0u32..8, k in -2.5f64..2.5, cosh_rho in 1.1f64..10.0) {
        // Q has poles at nu = K - 1/2 - n; P must not.
        let nu = c(k - 0.5 - n as f64, 0.0);
        let arg = Argument::cosh(cosh_rho.acosh()).unwrap();
        let v = p_at(c(-0.5 - k, 0.0), nu, &arg).unwrap();
        prop_assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn regularized_norm_matches_closed_value(eps in 1e-4f64..1.0, cosh_rho in 1.1f64..20.0) {
        let rho = cosh_rho.acosh();
        let r = norm_regularized_k0(rho, eps).unwrap();
        let want = PI * PI / (4.0 * eps * rho.sinh());
        prop_assert!((r.analytic - want).abs() <= 1e-12 * want);
        prop_assert!((r.numeric.value - want).abs() <= 1e-6 * want);
    }

    #[test]
    fn pole_records_round_trip(k in -3.0f64..3.0, cosh_rho in 1.1f64..10.0) {
        let window = Window::default();
        for p in predict_poles(KParam::detect(k), &window, cosh_rho.acosh()).unwrap() {
            let r = pole_record(&p);
            prop_assert_eq!(Record::parse(&r.to_json()).unwrap(), r);
        }
    }

    #[test]
    fn classification_follows_k(k in -4i32..5, frac in 0.05f64..0.95) {
        let window = Window::default();
        let integer = classify_exceptional(KParam::detect(k as f64), &window);
        if k < 0 {
            prop_assert_eq!(integer.kind, EpKind::None);
            prop_assert_eq!(integer.pole_count_in_window, 0);
        } else {
            prop_assert_eq!(integer.kind, EpKind::Finite);
            prop_assert_eq!(integer.total_poles, Some(2 * k as u64 + 1));
        }
        let general = classify_exceptional(KParam::detect(k as f64 + frac), &window);
        prop_assert_eq!(general.kind, EpKind::Infinite);
        prop_assert_eq!(general.total_poles, None);
    }
}

#[test]
fn q_is_unchanged_by_point_constructors() {
    let pt = EvalPoint::from_cosh(c(0.3, 0.1), c(-0.2, 1.4), 2.5).unwrap();
    let same = EvalPoint::new(pt.mu, pt.nu, pt.rho).unwrap();
    assert!(rel(q_general(&pt).unwrap(), q_general(&same).unwrap()) < 1e-14);
}
