//! Quadrature-level properties on the charted groups, each compared against
//! the estimator's own reported error or against an independent 1-d rule.

use std::f64::consts::PI;

use doublecoset::averaging::{q_apply, unit_on_compact, CosetSupport};
use doublecoset::coset::{check_in_property, DoubleCosetSpace};
use doublecoset::function::bump;
use doublecoset::haar::{integrate_haar, left_invariance_residual, modular_residual};
use doublecoset::subgroup::resolve;
use doublecoset::{ChartLaw, Element, Group, IntegrationScheme, Region, Support, TestFunction};

fn space(law: ChartLaw, k: &str, h: &str) -> DoubleCosetSpace {
    let g = Group::charted(law);
    DoubleCosetSpace::new(g.clone(), resolve(&g, k).unwrap(), resolve(&g, h).unwrap()).unwrap()
}

/// Composite Simpson on `[lo, hi]` with `n` (even) panels.
fn simpson(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn affine_product_bump_tensor_matches_monte_carlo_and_simpson() {
    // a in [1, 2], b in [0, 1], density 1 / a^2.
    let g = Group::charted(ChartLaw::AffineLine);
    let f = TestFunction::bump(ChartLaw::AffineLine, Region::new(&[1.0, 0.0], &[2.0, 1.0]), 1.0).unwrap();
    let t = integrate_haar(&g, &f, &IntegrationScheme::tensor(64)).unwrap();
    let mc = integrate_haar(&g, &f, &IntegrationScheme::monte_carlo(200_000, 3)).unwrap();
    assert!(t.error <= 1e-6, "{t:?}");
    assert!((t.value - mc.value).abs() <= t.error + mc.error, "{t:?} {mc:?}");

    let pa = simpson(1.0, 2.0, 4000, |a| bump(2.0 * (a - 1.5)) / (a * a));
    let pb = simpson(0.0, 1.0, 4000, |b| bump(2.0 * (b - 0.5)));
    assert!((t.value - pa * pb).abs() <= t.error.max(1e-12), "{} vs {}", t.value, pa * pb);
}

#[test]
fn heisenberg_is_unimodular_within_reported_error() {
    let g = Group::charted(ChartLaw::Heisenberg);
    let f = TestFunction::bump(ChartLaw::Heisenberg, Region::new(&[-0.5, -0.4, -0.6], &[0.6, 0.5, 0.4]), 1.0).unwrap();
    let scheme = IntegrationScheme::tensor(64);
    for y in [[0.3, -0.7, 0.2], [-1.1, 0.4, 0.9], [0.05, 0.05, -1.5]] {
        let y = Element::Coords(y);
        let m = modular_residual(&g, &f, &y, &scheme).unwrap();
        let l = left_invariance_residual(&g, &f, &y, &scheme).unwrap();
        assert!(m.value <= m.error, "modular {m:?}");
        assert!(l.value <= l.error, "left {l:?}");
        assert!(m.error <= 1e-6 && l.error <= 1e-6);
    }
}

#[test]
fn affine_group_modular_function_is_one_over_a() {
    let g = Group::charted(ChartLaw::AffineLine);
    let f = TestFunction::bump(ChartLaw::AffineLine, Region::new(&[0.8, -0.5], &[1.6, 0.7]), 1.0).unwrap();
    let scheme = IntegrationScheme::tensor(128);
    for y in [[0.5, 0.3], [1.7, -0.2]] {
        let y = Element::Coords([y[0], y[1], 0.0]);
        assert!((g.modular(&y) - 1.0 / y.coords().unwrap()[0]).abs() < 1e-15);
        let m = modular_residual(&g, &f, &y, &scheme).unwrap();
        assert!(m.value <= m.error && m.error <= 1e-6, "{m:?}");
    }
}

#[test]
fn rotations_satisfy_the_in_property() {
    let s = space(ChartLaw::Se2, "so2", "so2");
    let f = TestFunction::bump(ChartLaw::Se2, Region::new(&[0.0, -0.5, -0.3], &[0.0, 0.6, 0.4]), 1.0).unwrap();
    let scheme = IntegrationScheme::tensor(32);
    for t in [0.0, 0.7, -2.3, 3.0] {
        let n = s.k().embed(t);
        let r = check_in_property(&s, &n, &f, &scheme).unwrap();
        assert!(r.value <= r.error.max(1e-14), "{t}: {r:?}");
    }
}

fn radial(lo: f64, hi: f64) -> TestFunction {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let support = Support::Region(Region::new(&[-PI, -hi, -hi], &[PI, hi, hi]));
    TestFunction::from_fn(support, true, "radial", move |x| {
        let c = x.coords().unwrap();
        Ok(bump((c[1].hypot(c[2]) - mid) / half))
    })
}

#[test]
fn radial_averages_agree_on_equal_norm_representatives() {
    let s = space(ChartLaw::Se2, "so2", "so2");
    let f = radial(0.4, 1.4);
    let scheme = IntegrationScheme::tensor(32);
    for r in [0.6, 0.9, 1.2] {
        let p1 = Element::Coords([0.0, r, 0.0]);
        let p2 = Element::Coords([0.9, r * 2.1f64.cos(), r * 2.1f64.sin()]);
        let a = q_apply(&s, &f, &p1, &scheme).unwrap();
        let b = q_apply(&s, &f, &p2, &scheme).unwrap();
        assert!(a.value > 0.0);
        assert!((a.value - b.value).abs() <= 2.0 * a.error.max(b.error).max(1e-15), "{r}: {a:?} {b:?}");
    }
}

#[test]
fn unit_on_a_radial_band() {
    let s = space(ChartLaw::Se2, "so2", "so2");
    let scheme = IntegrationScheme::tensor(32);
    let (f, _) = unit_on_compact(&s, &CosetSupport::Interval(0.5, 1.0), &scheme).unwrap();
    for r in [0.5, 0.6, 0.75, 0.9, 1.0] {
        for theta in [0.0, 1.3] {
            let p = Element::Coords([theta, r * theta.cos(), r * theta.sin()]);
            let q = q_apply(&s, &f, &p, &scheme).unwrap();
            let eps = 5.0 * (q.error + f.relative_error());
            assert!((q.value - 1.0).abs() <= eps.max(1e-12), "{r} {theta}: {q:?} eps={eps}");
        }
    }
}
