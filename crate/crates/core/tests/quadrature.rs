//! Invariants of the error-carrying arithmetic and the box integrators.

use std::f64::consts::PI;

use doublecoset::function::bump;
use doublecoset::integrate::{integrate_box, Axis};
use doublecoset::{Estimate, IntegrationScheme};
use proptest::prelude::*;

fn simpson(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

fn est() -> impl Strategy<Value = Estimate> {
    (-10.0f64..10.0, 0.0f64..1.0).prop_map(|(v, e)| Estimate::new(v, e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimate_errors_accumulate(a in est(), b in est(), c in -3.0f64..3.0) {
        let s = a + b;
        let d = a - b;
        prop_assert_eq!(s.error, a.error + b.error);
        prop_assert_eq!(d.error, s.error);
        prop_assert_eq!(s.value, (b + a).value);
        prop_assert!((a * b).error >= 0.0);
        prop_assert_eq!(a.scale(c).error, c.abs() * a.error);
    }

    #[test]
    fn quotient_error_covers_perturbations(a in est(), b in (0.5f64..5.0, 0.0f64..0.1).prop_map(|(v, e)| Estimate::new(v, e))) {
        let q = a.div(b);
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let moved = (a.value + sa * a.error) / (b.value + sb * b.error);
            // First-order bound, with room for the second-order term.
            prop_assert!((moved - q.value).abs() <= q.error * (1.0 + b.error / (b.value - b.error)) + 1e-12);
        }
    }

    #[test]
    fn tensor_matches_simpson_within_reported_error(c in -0.5f64..0.5, w in 0.3f64..1.2, n in prop::sample::select(vec![32usize, 64, 128])) {
        let f = move |t: f64| bump((t - c) / w) * (1.0 + 0.3 * t);
        let est = integrate_box(&[Axis::new(-2.0, 2.0)], &IntegrationScheme::tensor(n), |x| Ok(f(x[0]))).unwrap();
        let reference = simpson(c - w, c + w, 20_000, f);
        // The harness judges residuals against five times the reported error.
        prop_assert!((est.value - reference).abs() <= 5.0 * est.error.max(1e-13), "{est:?} vs {reference}");
    }

    #[test]
    fn periodic_arcs_do_not_depend_on_the_seam(c in -PI..PI, w in 0.4f64..1.2) {
        // A bump on an arc of the circle: the integral must not care where
        // the arc sits relative to the seam of the chart.
        let dist = move |t: f64| (t - c + PI).rem_euclid(2.0 * PI) - PI;
        let est = integrate_box(&[Axis::periodic(-PI, PI)], &IntegrationScheme::tensor(128), |x| Ok(bump(dist(x[0]) / w))).unwrap();
        let reference = simpson(-w, w, 20_000, |t| bump(t / w));
        prop_assert!((est.value - reference).abs() <= 5.0 * est.error.max(1e-13), "{est:?} vs {reference}");
    }

    #[test]
    fn monte_carlo_is_reproducible(seed in 0u64..1000) {
        let f = |x: &[f64]| Ok(bump(x[0]) * bump(x[1]));
        let axes = [Axis::new(-1.5, 1.5), Axis::new(-1.5, 1.5)];
        let a = integrate_box(&axes, &IntegrationScheme::monte_carlo(2000, seed), f).unwrap();
        let b = integrate_box(&axes, &IntegrationScheme::monte_carlo(2000, seed), f).unwrap();
        prop_assert_eq!(a, b);
        let other = integrate_box(&axes, &IntegrationScheme::monte_carlo(2000, seed).with_stream(1), f).unwrap();
        prop_assert_ne!(a.value, other.value);
    }
}

#[test]
fn support_touching_the_box_edge_is_rejected() {
    let r = integrate_box(&[Axis::new(0.0, 1.0)], &IntegrationScheme::tensor(32), |x| Ok(1.0 + x[0]));
    assert!(r.is_err());
}
