//! The averaging operator `Q(f)(KxH) = int_K int_H f(k^-1 x h) dh dk`, functions
//! on the double coset space, and the section lift inverting `Q`.

use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;

use crate::coset::DoubleCosetSpace;
use crate::error::{Error, Result};
use crate::function::{bump, smooth_step, ErrorTracker, Support, TestFunction};
use crate::group::Element;
use crate::integrate::{integrate_box, Estimate, IntegrationScheme};

/// Compact support of a function on `K\G/H`.
#[derive(Debug, Clone, PartialEq)]
pub enum CosetSupport {
    /// Sorted class indices (finite spaces).
    Classes(Vec<usize>),
    /// Closed interval of the class parameter (charted spaces).
    Interval(f64, f64),
}

impl CosetSupport {
    pub fn contains(&self, space: &DoubleCosetSpace, p: &Element) -> bool {
        match self {
            CosetSupport::Classes(c) => space.class_index(p).is_some_and(|i| c.binary_search(&i).is_ok()),
            CosetSupport::Interval(lo, hi) => space.class_param(p).is_some_and(|t| *lo <= t && t <= *hi),
        }
    }

    /// Classes of the support of a function on `G`.
    pub fn image_of(space: &DoubleCosetSpace, support: &Support) -> Result<Self> {
        match (support, space.geometry()) {
            (Support::Elements(e), None) => {
                let mut c: Vec<usize> = e.iter().filter_map(|&i| space.class_index(&Element::Index(i))).collect();
                c.sort_unstable();
                c.dedup();
                Ok(CosetSupport::Classes(c))
            }
            (Support::Region(r), Some(g)) => {
                let (lo, hi) = g.class_interval(r);
                Ok(CosetSupport::Interval(lo, hi))
            }
            _ => Err(Error::Precondition("support kind does not match the space".into())),
        }
    }

    /// Image under `p -> n . p`.
    pub fn translate(&self, space: &DoubleCosetSpace, n: &Element) -> Result<Self> {
        match self {
            CosetSupport::Classes(c) => {
                let reps = space.classes().unwrap();
                let mut out = Vec::with_capacity(c.len());
                for &i in c {
                    let q = space.n_action(n, &Element::Index(reps.representative(i)))?;
                    out.push(space.class_index(&q).unwrap());
                }
                out.sort_unstable();
                Ok(CosetSupport::Classes(out))
            }
            CosetSupport::Interval(lo, hi) => {
                // The action on class parameters is monotone on every catalog space.
                let a = space.class_param(&space.n_action(n, &space.class_rep(*lo))?).unwrap();
                let b = space.class_param(&space.n_action(n, &space.class_rep(*hi))?).unwrap();
                Ok(CosetSupport::Interval(a.min(b), a.max(b)))
            }
        }
    }
}

type ClassFn = dyn Fn(&Element) -> Result<Estimate> + Send + Sync;

/// A function on `K\G/H`, stored on canonical representatives. Evaluation at
/// any element projects first, so well-definedness is structural.
#[derive(Clone)]
pub struct CosetFunction {
    eval: Arc<ClassFn>,
    support: CosetSupport,
    label: String,
}

impl fmt::Debug for CosetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CosetFunction").field("label", &self.label).field("support", &self.support).finish()
    }
}

/// Per-class cache keyed by the canonical representative.
#[derive(Debug, Default)]
pub struct ClassMemo(DashMap<[u64; 3], Estimate>);

impl ClassMemo {
    pub fn get_or_compute(&self, key: [u64; 3], compute: impl FnOnce() -> Result<Estimate>) -> Result<Estimate> {
        if let Some(v) = self.0.get(&key) {
            return Ok(*v);
        }
        // Computed outside the map lock; a racing duplicate computes the same value.
        let v = compute()?;
        self.0.insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl CosetFunction {
    /// `f` receives canonical representatives inside the support.
    pub fn from_fn<F>(support: CosetSupport, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Element) -> Result<Estimate> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), support, label: label.into() }
    }

    pub fn evaluate(&self, space: &DoubleCosetSpace, x: &Element) -> Result<Estimate> {
        let p = space.project(x)?;
        if !self.support.contains(space, &p) {
            return Ok(Estimate::exact(0.0));
        }
        (self.eval)(&p)
    }

    pub fn support(&self) -> &CosetSupport {
        &self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Table of values per class (finite spaces).
    pub fn class_table(space: &DoubleCosetSpace, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let classes = space.classes().ok_or_else(|| Error::Unsupported("class table on charted space".into()))?;
        if values.len() != classes.classes.len() {
            return Err(Error::Precondition("one value per class expected".into()));
        }
        let support: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
        let class_of = classes.class_of.clone();
        Ok(Self::from_fn(CosetSupport::Classes(support), label, move |p| {
            Ok(Estimate::exact(values[class_of[p.index().unwrap()]]))
        }))
    }

    pub fn indicator(space: &DoubleCosetSpace, class: usize) -> Result<Self> {
        let n = space.classes().ok_or_else(|| Error::Unsupported("class indicator on charted space".into()))?.classes.len();
        let mut v = vec![0.0; n];
        v[class] = 1.0;
        Self::class_table(space, v, format!("1[class {class}]"))
    }

    /// `amp * bump` of the class parameter on `[lo, hi]` (charted spaces).
    pub fn class_bump(space: &DoubleCosetSpace, lo: f64, hi: f64, amplitude: f64) -> Result<Self> {
        let geom = space.geometry().ok_or_else(|| Error::Unsupported("class bump on finite space".into()))?;
        let (c, w) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        Ok(Self::from_fn(CosetSupport::Interval(lo, hi), format!("bump[{lo:.3},{hi:.3}]"), move |p| {
            let t = geom.class_param(&p.coords().unwrap());
            Ok(Estimate::exact(amplitude * bump((t - c) / w)))
        }))
    }

    /// Smooth function equal to 1 on `[lo, hi]` and 0 outside `[lo - delta, hi + delta]`.
    pub fn smooth_unit(space: &DoubleCosetSpace, lo: f64, hi: f64, delta: f64) -> Result<Self> {
        let geom = space.geometry().ok_or_else(|| Error::Unsupported("smooth unit on finite space".into()))?;
        let support = CosetSupport::Interval(lo - delta, hi + delta);
        Ok(Self::from_fn(support, format!("unit[{lo:.3},{hi:.3}]"), move |p| {
            let t = geom.class_param(&p.coords().unwrap());
            Ok(Estimate::exact(smooth_step((t - (lo - delta)) / delta) * smooth_step(((hi + delta) - t) / delta)))
        }))
    }

    /// `Q(f)`, memoized per class.
    pub fn averaged(space: &DoubleCosetSpace, f: &TestFunction, scheme: &IntegrationScheme) -> Result<Self> {
        let support = CosetSupport::image_of(space, f.support())?;
        let memo = Arc::new(ClassMemo::default());
        let (space2, f2, scheme) = (space.clone(), f.clone(), *scheme);
        Ok(Self::from_fn(support, format!("Q({})", f.label()), move |p| {
            memo.get_or_compute(p.key(), || q_apply(&space2, &f2, p, &scheme))
        }))
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.clone();
        Self::from_fn(self.support.clone(), format!("{c}*{}", self.label), move |p| Ok((f.eval)(p)?.scale(c)))
    }

    /// Pointwise product with another class function; support of `self`.
    pub fn mul(&self, space: &DoubleCosetSpace, other: &CosetFunction) -> Self {
        let (f, g, space) = (self.clone(), other.clone(), space.clone());
        Self::from_fn(self.support.clone(), format!("{}*{}", self.label, other.label), move |p| {
            let a = (f.eval)(p)?;
            if a.value == 0.0 && a.error == 0.0 {
                return Ok(a);
            }
            Ok(a * g.evaluate(&space, p)?)
        })
    }

    pub fn sub(&self, space: &DoubleCosetSpace, other: &CosetFunction) -> Result<Self> {
        let support = match (&self.support, &other.support) {
            (CosetSupport::Classes(a), CosetSupport::Classes(b)) => {
                let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
                v.sort_unstable();
                v.dedup();
                CosetSupport::Classes(v)
            }
            (CosetSupport::Interval(a, b), CosetSupport::Interval(c, d)) => CosetSupport::Interval(a.min(*c), b.max(*d)),
            _ => return Err(Error::Precondition("mixed coset supports".into())),
        };
        let (f, g, space) = (self.clone(), other.clone(), space.clone());
        Ok(Self::from_fn(support, format!("{}-{}", self.label, other.label), move |p| {
            Ok(f.evaluate(&space, p)? - g.evaluate(&space, p)?)
        }))
    }

    /// `L_n F : p -> F(n^-1 . p)`.
    pub fn translate(&self, space: &DoubleCosetSpace, n: &Element) -> Result<Self> {
        let support = self.support.translate(space, n)?;
        let ni = space.group().inv(n)?;
        let (f, space) = (self.clone(), space.clone());
        Ok(Self::from_fn(support, format!("L_n {}", self.label), move |p| {
            let q = space.n_action(&ni, p)?;
            f.evaluate(&space, &q)
        }))
    }
}

/// `Q(f)(KpH) = int_K int_H f(k^-1 p h) dh dk`.
pub fn q_apply(space: &DoubleCosetSpace, f: &TestFunction, p: &Element, scheme: &IntegrationScheme) -> Result<Estimate> {
    space.group().validate(p)?;
    let est = space.kh_integral(p, f.support(), scheme, |_, _, y| f.evaluate(y))?;
    Ok(Estimate::new(est.value, est.error + f.relative_error() * est.value.abs()))
}

/// `Q` evaluated with the two subgroup integrals iterated in both orders;
/// returns `|K-then-H - H-then-K|` with its error bound. Spaces with at most
/// one continuous subgroup have nothing to swap and return an exact 0.
pub fn fubini_residual(space: &DoubleCosetSpace, f: &TestFunction, p: &Element, scheme: &IntegrationScheme) -> Result<Estimate> {
    let (Some(kc), Some(hc), Some(geom)) = (space.k().curve(), space.h().curve(), space.geometry()) else {
        return Ok(Estimate::exact(0.0));
    };
    let law = geom.law();
    let x = p.coords().unwrap();
    let b = f.support().region().ok_or_else(|| Error::IntegrationDomain("support box expected".into()))?;
    let Some(w) = geom.windows(&x, b) else {
        return Ok(Estimate::exact(0.0));
    };
    let (ka, ha) = (w.k.unwrap(), w.h.unwrap());
    let value = |s: f64, t: f64| -> Result<f64> {
        let (k, h) = (kc.embed(s), hc.embed(t));
        f.evaluate(&Element::Coords(law.mul(&law.mul(&law.inv(&k), &x), &h)))
    };
    let tracker = ErrorTracker::default();
    let inner = |axis, g: &(dyn Fn(f64) -> Result<f64> + Sync)| -> Result<f64> {
        let e = integrate_box(&[axis], scheme, |u| g(u[0]))?;
        tracker.record(e.error / e.value.abs().max(f64::MIN_POSITIVE));
        Ok(e.value)
    };
    let kh = integrate_box(&[ka], scheme, |s| inner(ha, &|t| value(s[0], t)))?;
    let hk = integrate_box(&[ha], scheme, |t| inner(ka, &|s| value(s, t[0])))?;
    let d = kh - hk;
    let inner_err = tracker.max().min(1.0) * (kh.value.abs() + hk.value.abs());
    Ok(Estimate::new(d.value.abs(), d.error + inner_err))
}

/// A dominating function for `F` supported on `support`: `Q(g) > 0` there.
pub fn dominating(space: &DoubleCosetSpace, support: &CosetSupport) -> Result<TestFunction> {
    match (support, space.geometry()) {
        (CosetSupport::Classes(c), None) => {
            let classes = space.classes().unwrap();
            let members: Vec<usize> = c.iter().flat_map(|&i| classes.classes[i].iter().copied()).collect();
            Ok(TestFunction::indicator(space.group().order().unwrap(), &members, "dominating"))
        }
        (CosetSupport::Interval(lo, hi), Some(geom)) => {
            let delta = 0.25 * (hi - lo).max(1.0);
            TestFunction::bump(geom.law(), geom.cover_box(*lo, *hi, delta), 1.0)
        }
        _ => Err(Error::Precondition("support kind does not match the space".into())),
    }
}

/// `f_1(x) = g(x) F(q(x)) / Q(g)(q(x))` (0 where `g(x) F(q(x)) = 0`), so
/// that `Q(f_1) = F` whenever `Q(g) > 0` on the support of `F`.
pub fn section_lift(
    space: &DoubleCosetSpace,
    big_f: &CosetFunction,
    g: &TestFunction,
    scheme: &IntegrationScheme,
) -> Result<TestFunction> {
    let qg = CosetFunction::averaged(space, g, scheme)?;
    let tracker = Arc::new(ErrorTracker::default());
    let support = match g.support() {
        Support::Elements(e) => Support::Elements(
            e.iter().copied().filter(|&i| big_f.support.contains(space, &space.canonical(&Element::Index(i)))).collect(),
        ),
        s => s.clone(),
    };
    let (space2, f2, g2, t2) = (space.clone(), big_f.clone(), g.clone(), tracker.clone());
    let lifted = TestFunction::from_fn(support, g.is_nonnegative(), format!("lift({})", big_f.label()), move |x| {
        let fx = f2.evaluate(&space2, x)?;
        if fx.value == 0.0 {
            return Ok(0.0);
        }
        // Checked even where g vanishes: a class of F missed by g is a
        // coverage defect, not a zero.
        let d = qg.evaluate(&space2, x)?;
        if !(d.value > 0.0) {
            return Err(Error::Coverage(format!(
                "Q(g) = {} at {} where F = {}",
                d.value,
                space2.group().label(x),
                fx.value
            )));
        }
        let gx = g2.evaluate(x)?;
        if gx == 0.0 {
            return Ok(0.0);
        }
        t2.record(fx.error / fx.value.abs() + d.error / d.value);
        Ok(gx * fx.value / d.value)
    });
    Ok(lifted.with_tracker(tracker))
}

/// A nonnegative `f` with `Q(f) = 1` on the given classes, built as the
/// section lift of a (smoothed) unit against a dominating bump. Returns the
/// lift and the class function it reproduces.
pub fn unit_on_compact(
    space: &DoubleCosetSpace,
    region: &CosetSupport,
    scheme: &IntegrationScheme,
) -> Result<(TestFunction, CosetFunction)> {
    let target = match region {
        CosetSupport::Classes(c) => {
            if c.is_empty() {
                return Err(Error::Precondition("empty class region".into()));
            }
            let n = space.classes().unwrap().classes.len();
            let mut v = vec![0.0; n];
            for &i in c {
                v[i] = 1.0;
            }
            CosetFunction::class_table(space, v, "unit")?
        }
        CosetSupport::Interval(lo, hi) => {
            if !(lo <= hi) {
                return Err(Error::Precondition("empty class interval".into()));
            }
            CosetFunction::smooth_unit(space, *lo, *hi, 0.25 * (hi - lo).max(0.5))?
        }
    };
    let g = dominating(space, target.support())?;
    Ok((section_lift(space, &target, &g, scheme)?, target))
}

/// `max_p |Q(L_n f)(p) - Q(f)(n^-1 . p)|` over the given classes, with error bound.
pub fn check_intertwining(
    space: &DoubleCosetSpace,
    n: &Element,
    f: &TestFunction,
    classes: &[Element],
    scheme: &IntegrationScheme,
) -> Result<Estimate> {
    if !space.in_normalizer(n) {
        return Err(Error::Precondition(format!("{} is not in N", space.group().label(n))));
    }
    let lf = f.left_translate(space.group(), n)?;
    let ni = space.group().inverse(n);
    let mut worst = Estimate::exact(0.0);
    for p in classes {
        let a = q_apply(space, &lf, p, scheme)?;
        let b = q_apply(space, f, &space.n_action(&ni, p)?, scheme)?;
        let d = a - b;
        worst.value = worst.value.max(d.value.abs());
        worst.error = worst.error.max(d.error);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ChartLaw, FiniteGroup, Group, Region};
    use crate::subgroup::resolve;

    fn space(group: Group, k: &str, h: &str) -> DoubleCosetSpace {
        let (k, h) = (resolve(&group, k).unwrap(), resolve(&group, h).unwrap());
        DoubleCosetSpace::new(group, k, h).unwrap()
    }

    #[test]
    fn indicator_of_identity_in_s3() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "<(12)>", "<(12)>");
        let f = TestFunction::indicator(6, &[0], "delta_e");
        let e = Element::Index(0);
        // k^-1 e h = e exactly for the two pairs with k = h (counting measure).
        assert_eq!(q_apply(&s, &f, &e, &IntegrationScheme::ExactSum).unwrap().value, 2.0);
        let other = s.classes().unwrap().representative(1);
        assert_eq!(q_apply(&s, &f, &Element::Index(other), &IntegrationScheme::ExactSum).unwrap().value, 0.0);
    }

    #[test]
    fn trivial_subgroups_give_point_evaluation() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "e", "e");
        let f = TestFunction::table(vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0], "f");
        for i in 0..6 {
            let x = Element::Index(i);
            assert_eq!(q_apply(&s, &f, &x, &IntegrationScheme::ExactSum).unwrap().value, f.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn lift_of_class_indicator_is_exact() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "<(12)>", "<(12)>");
        let big_f = CosetFunction::indicator(&s, 1).unwrap();
        let g = dominating(&s, big_f.support()).unwrap();
        let f1 = section_lift(&s, &big_f, &g, &IntegrationScheme::ExactSum).unwrap();
        for i in 0..6 {
            let x = Element::Index(i);
            let q = q_apply(&s, &f1, &x, &IntegrationScheme::ExactSum).unwrap().value;
            assert_eq!(q, big_f.evaluate(&s, &x).unwrap().value);
        }
    }

    #[test]
    fn se2_radial_bump_depends_only_on_norm() {
        let g = Group::charted(ChartLaw::Se2);
        let s = space(g, "so2", "so2");
        let radial = TestFunction::from_fn(
            Support::Region(Region::new(&[-std::f64::consts::PI, -1.0, -1.0], &[std::f64::consts::PI, 1.0, 1.0])),
            true,
            "radial",
            |x| {
                let c = x.coords().unwrap();
                Ok(bump(c[1].hypot(c[2])))
            },
        );
        let scheme = IntegrationScheme::tensor(64);
        let r = 0.6f64;
        let a = q_apply(&s, &radial, &Element::Coords([0.0, r, 0.0]), &scheme).unwrap();
        let b = q_apply(&s, &radial, &Element::Coords([1.1, r * 0.8, r * 0.6]), &scheme).unwrap();
        assert!((a.value - b.value).abs() <= 2.0 * (a.error + b.error).max(1e-14), "{a:?} {b:?}");
        // Two circles of length 2 pi each.
        assert!((a.value - 4.0 * std::f64::consts::PI * std::f64::consts::PI * bump(r)).abs() < 1e-9);
    }

    #[test]
    fn se2_unit_band() {
        let g = Group::charted(ChartLaw::Se2);
        let s = space(g, "so2", "so2");
        let scheme = IntegrationScheme::tensor(64);
        let (f, _) = unit_on_compact(&s, &CosetSupport::Interval(0.5, 1.0), &scheme).unwrap();
        for t in [0.5, 0.7, 0.85, 1.0] {
            let q = q_apply(&s, &f, &s.class_rep(t), &scheme).unwrap();
            assert!((q.value - 1.0).abs() <= 5.0 * q.error.max(1e-14), "{t}: {q:?}");
        }
    }

    #[test]
    fn coverage_error_when_not_dominated() {
        let g = Group::charted(ChartLaw::Heisenberg);
        let s = space(g, "center", "x-axis");
        let big_f = CosetFunction::class_bump(&s, -1.0, 1.0, 1.0).unwrap();
        // Dominating bump only covers y in [0, 2].
        let g = TestFunction::bump(ChartLaw::Heisenberg, Region::new(&[-1.0, 0.0, -1.0], &[1.0, 2.0, 1.0]), 1.0).unwrap();
        let f1 = section_lift(&s, &big_f, &g, &IntegrationScheme::tensor(32)).unwrap();
        let err = f1.evaluate(&Element::Coords([0.0, 0.0, 0.0]));
        assert!(matches!(err, Err(Error::Coverage(_))), "{err:?}");
    }
}
