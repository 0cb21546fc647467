//! Compactly supported test functions on a group.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{ChartLaw, Element, Group, Region};

/// Smooth bump on `(-1, 1)`, normalized to 1 at the origin.
///
/// The steep profile `exp(4 - 4 / (1 - t^2))` keeps trapezoid errors near
/// machine precision at moderate resolutions.
#[inline]
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (4.0 - 4.0 / s).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Running maximum of relative evaluation errors (for functions whose values
/// come from inner integrals).
#[derive(Debug, Default)]
pub struct ErrorTracker(AtomicU64);

impl ErrorTracker {
    pub fn record(&self, relative: f64) {
        if relative.is_finite() && relative > 0.0 {
            // Bit order matches numeric order for nonnegative floats.
            self.0.fetch_max(relative.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn max(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

/// Where a function may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Sorted element indices (finite groups).
    Elements(Vec<usize>),
    /// Closed chart box; the function vanishes on and outside its boundary.
    Region(Region),
}

impl Support {
    pub fn region(&self) -> Option<&Region> {
        match self {
            Support::Region(r) => Some(r),
            Support::Elements(_) => None,
        }
    }

    pub fn elements(&self) -> Option<&[usize]> {
        match self {
            Support::Elements(e) => Some(e),
            Support::Region(_) => None,
        }
    }

    fn union(&self, other: &Support) -> Support {
        match (self, other) {
            (Support::Elements(a), Support::Elements(b)) => {
                let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
                v.sort_unstable();
                v.dedup();
                Support::Elements(v)
            }
            (Support::Region(a), Support::Region(b)) => Support::Region(a.hull(b)),
            _ => panic!("mixed support kinds"),
        }
    }
}

type EvalFn = dyn Fn(&Element) -> Result<f64> + Send + Sync;

/// An evaluable function on a group with a declared compact support.
#[derive(Clone)]
pub struct TestFunction {
    eval: Arc<EvalFn>,
    support: Support,
    nonnegative: bool,
    label: String,
    tracker: Option<Arc<ErrorTracker>>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("nonnegative", &self.nonnegative)
            .finish()
    }
}

impl TestFunction {
    pub fn from_fn<F>(support: Support, nonnegative: bool, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Element) -> Result<f64> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), support, nonnegative, label: label.into(), tracker: None }
    }

    pub fn with_tracker(mut self, tracker: Arc<ErrorTracker>) -> Self {
        self.tracker = Some(tracker);
        self
    }

    /// Table of values on a finite group.
    pub fn table(values: Vec<f64>, label: impl Into<String>) -> Self {
        let support: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        let values = Arc::new(values);
        Self::from_fn(Support::Elements(support), nonnegative, label, move |x| match x {
            Element::Index(i) => values
                .get(*i)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("index {i} outside table"))),
            Element::Coords(_) => Err(Error::Precondition("table function on charted element".into())),
        })
    }

    pub fn indicator(order: usize, members: &[usize], label: impl Into<String>) -> Self {
        let mut values = vec![0.0; order];
        for &m in members {
            values[m] = 1.0;
        }
        Self::table(values, label)
    }

    /// Random table with values in `[lo, hi]` on the given elements.
    pub fn random_table<R: Rng + ?Sized>(
        order: usize,
        on: &[usize],
        lo: f64,
        hi: f64,
        rng: &mut R,
        label: impl Into<String>,
    ) -> Self {
        let mut values = vec![0.0; order];
        for &m in on {
            values[m] = rng.gen_range(lo..=hi);
        }
        Self::table(values, label)
    }

    /// Product bump `amp * prod_i bump((x_i - c_i) / w_i)` on a chart box.
    /// Periodic axes contribute a factor 1, so the box spans the full period there.
    pub fn bump(law: ChartLaw, region: Region, amplitude: f64) -> Result<Self> {
        let region = law.full_angle(region);
        if !law.in_domain(&region.lo) || !law.in_domain(&region.hi) {
            return Err(Error::DomainViolation {
                group: law.name().into(),
                detail: format!("bump box {region:?} leaves the chart"),
            });
        }
        let center = region.center();
        let periodic = law.periodic_axis();
        let dim = law.dim();
        let half: Vec<f64> = (0..dim).map(|i| 0.5 * region.width(i)).collect();
        let label = format!("bump{:?}..{:?}", &region.lo[..dim], &region.hi[..dim]);
        Ok(Self::from_fn(Support::Region(region), amplitude >= 0.0, label, move |x| {
            let c = x.coords().ok_or_else(|| Error::Precondition("bump on finite element".into()))?;
            let mut v = amplitude;
            for i in 0..dim {
                if Some(i) == periodic {
                    continue;
                }
                v *= bump((c[i] - center[i]) / half[i]);
                if v == 0.0 {
                    break;
                }
            }
            Ok(v)
        }))
    }

    pub fn zero(group: &Group) -> Self {
        let support = match group.law() {
            None => Support::Elements(Vec::new()),
            Some(law) => {
                let e = law.identity();
                Support::Region(Region::centered(&e, &[0.0; 3], law.dim()))
            }
        };
        Self::from_fn(support, true, "zero", |_| Ok(0.0))
    }

    #[inline]
    pub fn evaluate(&self, x: &Element) -> Result<f64> {
        (self.eval)(x)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest relative error recorded while evaluating (0 for closed forms).
    pub fn relative_error(&self) -> f64 {
        self.tracker.as_ref().map_or(0.0, |t| t.max())
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.clone();
        let mut out = Self::from_fn(self.support.clone(), self.nonnegative && c >= 0.0, format!("{c}*{}", self.label), move |x| {
            Ok(c * f.evaluate(x)?)
        });
        out.tracker = self.tracker.clone();
        out
    }

    pub fn add(&self, other: &TestFunction) -> Self {
        let (f, g) = (self.clone(), other.clone());
        Self::from_fn(
            self.support.union(&other.support),
            self.nonnegative && other.nonnegative,
            format!("{}+{}", self.label, other.label),
            move |x| Ok(f.evaluate(x)? + g.evaluate(x)?),
        )
    }

    /// Pointwise product; the support is that of `self`.
    pub fn mul(&self, other: &TestFunction) -> Self {
        let (f, g) = (self.clone(), other.clone());
        Self::from_fn(
            self.support.clone(),
            self.nonnegative && other.nonnegative,
            format!("{}*{}", self.label, other.label),
            move |x| {
                let a = f.evaluate(x)?;
                if a == 0.0 {
                    return Ok(0.0);
                }
                Ok(a * g.evaluate(x)?)
            },
        )
    }

    /// `x -> f(a x b)`, support `a^-1 S b^-1`.
    pub fn two_sided(&self, group: &Group, a: &Element, b: &Element) -> Result<Self> {
        group.validate(a)?;
        group.validate(b)?;
        let (ai, bi) = (group.inverse(a), group.inverse(b));
        let support = map_support(group, &self.support, &ai, &bi);
        let (f, g, a, b) = (self.clone(), group.clone(), *a, *b);
        let mut out = Self::from_fn(support, self.nonnegative, format!("{}(a.b)", self.label), move |x| {
            f.evaluate(&g.op3(&a, x, &b))
        });
        out.tracker = self.tracker.clone();
        Ok(out)
    }

    /// `L_n f: x -> f(n^-1 x)`.
    pub fn left_translate(&self, group: &Group, n: &Element) -> Result<Self> {
        self.two_sided(group, &group.inv(n)?, &group.identity())
    }

    /// `x -> f(x y)`.
    pub fn right_translate(&self, group: &Group, y: &Element) -> Result<Self> {
        self.two_sided(group, &group.identity(), y)
    }

    /// Spot-check the declared support and sign on random samples.
    pub fn spot_check<R: Rng + ?Sized>(&self, group: &Group, samples: usize, rng: &mut R) -> Result<()> {
        for _ in 0..samples {
            let x = match (group.law(), &self.support) {
                (Some(law), Support::Region(r)) => {
                    // Sample a slightly enlarged box so the outside is probed too.
                    let b = law.full_angle(r.expanded(0.25 * (0..r.dim).map(|i| r.width(i)).fold(0.0, f64::max)));
                    let mut c = law.identity();
                    for i in 0..law.dim() {
                        c[i] = rng.gen_range(b.lo[i]..=b.hi[i]);
                    }
                    if !law.in_domain(&c) {
                        continue;
                    }
                    Element::Coords(c)
                }
                _ => group.sample(rng),
            };
            let v = self.evaluate(&x)?;
            let inside = match &self.support {
                Support::Elements(e) => x.index().is_some_and(|i| e.binary_search(&i).is_ok()),
                Support::Region(r) => x.coords().is_some_and(|c| r.contains(&c)),
            };
            if !inside && v != 0.0 {
                return Err(Error::Precondition(format!("{} is {v} outside its support at {x:?}", self.label)));
            }
            if self.nonnegative && v < 0.0 {
                return Err(Error::Precondition(format!("{} is negative at {x:?}", self.label)));
            }
        }
        Ok(())
    }
}

/// Support of `x -> f(a^-1 x b^-1)` given the support `S` of `f`: `a S b`.
fn map_support(group: &Group, support: &Support, a: &Element, b: &Element) -> Support {
    match support {
        Support::Elements(e) => {
            let mut v: Vec<usize> = e
                .iter()
                .map(|&i| group.op3(a, &Element::Index(i), b).index().unwrap())
                .collect();
            v.sort_unstable();
            Support::Elements(v)
        }
        Support::Region(r) => {
            let law = group.law().expect("region support on charted group");
            let (ca, cb) = (a.coords().unwrap(), b.coords().unwrap());
            let left = law.left_translate_region(&ca, r);
            Support::Region(law.right_translate_region(&left, &cb))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        assert!(bump(0.5) > 0.0 && bump(0.5) < 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn translated_bump_keeps_support_declaration() {
        let g = Group::charted(ChartLaw::AffineLine);
        let f = TestFunction::bump(ChartLaw::AffineLine, Region::new(&[1.0, 0.0], &[2.0, 1.0]), 1.0).unwrap();
        let y = Element::Coords([1.7, -0.3, 0.0]);
        let t = f.right_translate(&g, &y).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        t.spot_check(&g, 2000, &mut rng).unwrap();
        let l = f.left_translate(&g, &y).unwrap();
        l.spot_check(&g, 2000, &mut rng).unwrap();
    }

    #[test]
    fn finite_translation_permutes_table() {
        let s3 = Group::finite("S3", FiniteGroup::symmetric(3));
        let f = TestFunction::indicator(6, &[0], "delta_e");
        let n = Element::Index(3);
        let l = f.left_translate(&s3, &n).unwrap();
        // L_n delta_e = delta_n
        assert_eq!(l.evaluate(&n).unwrap(), 1.0);
        assert_eq!(l.support().elements().unwrap(), &[3]);
    }

    #[test]
    fn bump_outside_chart_rejected() {
        assert!(TestFunction::bump(ChartLaw::AffineLine, Region::new(&[-1.0, 0.0], &[1.0, 1.0]), 1.0).is_err());
    }
}
