//! Rho-functions for `(K, G, H)`: nonnegative `rho` with
//! `rho(k x h) = Delta_K(k) Delta_H(h) / Delta_G(h) * rho(x)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::averaging::ClassMemo;
use crate::coset::DoubleCosetSpace;
use crate::error::{Error, Result};
use crate::function::{Support, TestFunction};
use crate::group::{Element, Group, Region};
use crate::integrate::{Axis, Estimate, IntegrationScheme};

/// How a rho-function was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// `rho_f` for the labelled test function.
    FromF(String),
    /// Sum of `rho_{f^a}` over a covering set.
    CoveringSum { terms: usize },
    /// `c * lambda(n, KH)` on `N`, zero off `N`.
    FromLambda { c: f64 },
    /// `x -> rho(n^-1 x)`.
    Translated(String),
    /// Closed form (e.g. a constant on a unimodular space).
    Analytic(String),
    /// Deliberately altered function used to exercise failing checks.
    Synthetic(String),
}

type RhoFn = dyn Fn(&Element) -> Result<Estimate> + Send + Sync;

/// A rho-function with direct evaluation and a class-reduced route
/// `rho(x) = weight(x) * rho(q(x))` memoized per class.
#[derive(Clone)]
pub struct RhoFunction {
    direct: Arc<RhoFn>,
    memo: Arc<ClassMemo>,
    space: DoubleCosetSpace,
    provenance: Provenance,
    strictly_positive: bool,
}

impl fmt::Debug for RhoFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RhoFunction")
            .field("provenance", &self.provenance)
            .field("strictly_positive", &self.strictly_positive)
            .finish()
    }
}

impl RhoFunction {
    pub fn from_fn<F>(space: &DoubleCosetSpace, provenance: Provenance, f: F) -> Self
    where
        F: Fn(&Element) -> Result<Estimate> + Send + Sync + 'static,
    {
        Self {
            direct: Arc::new(f),
            memo: Arc::new(ClassMemo::default()),
            space: space.clone(),
            provenance,
            strictly_positive: false,
        }
    }

    /// The constant `c`; a rho-function only when every weight is 1.
    pub fn constant(space: &DoubleCosetSpace, c: f64) -> Result<Self> {
        // Unimodular G with unimodular K and H (finite, Heisenberg, SE(2)).
        if space.geometry().is_some_and(|g| g.law() == crate::group::ChartLaw::AffineLine) {
            return Err(Error::Precondition("constant rho needs trivial covariance weights".into()));
        }
        let mut r = Self::from_fn(space, Provenance::Analytic(format!("constant {c}")), move |_| Ok(Estimate::exact(c)));
        r.strictly_positive = c > 0.0;
        Ok(r)
    }

    pub fn space(&self) -> &DoubleCosetSpace {
        &self.space
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    /// Direct evaluation at any element.
    pub fn evaluate(&self, x: &Element) -> Result<Estimate> {
        self.space.group().validate(x)?;
        (self.direct)(x)
    }

    /// Value at the canonical representative of `p`'s class (memoized).
    pub fn class_value(&self, p: &Element) -> Result<Estimate> {
        let c = self.space.canonical(p);
        self.memo.get_or_compute(c.key(), || (self.direct)(&c))
    }

    /// `weight(x) * rho(q(x))`: equal to `evaluate` for a rho-function.
    pub fn evaluate_reduced(&self, x: &Element) -> Result<Estimate> {
        Ok(self.class_value(x)?.scale(self.space.covariance_weight(x)))
    }

    pub fn scale(&self, c: f64) -> Self {
        let r = self.clone();
        let mut out = Self::from_fn(&self.space, self.provenance.clone(), move |x| Ok((r.direct)(x)?.scale(c)));
        out.strictly_positive = self.strictly_positive && c > 0.0;
        out
    }

    /// Same function with a class zeroed out (for exercising failing checks).
    pub fn zeroed_on<P>(&self, label: &str, predicate: P) -> Self
    where
        P: Fn(&Element) -> bool + Send + Sync + 'static,
    {
        let (r, space) = (self.clone(), self.space.clone());
        Self::from_fn(&self.space, Provenance::Synthetic(label.into()), move |x| {
            if predicate(&space.canonical(x)) {
                Ok(Estimate::exact(0.0))
            } else {
                (r.direct)(x)
            }
        })
    }

    pub(crate) fn mark_strictly_positive(mut self) -> Self {
        self.strictly_positive = true;
        self
    }
}

/// `rho_f(x) = int_K int_H Delta_G(h) / (Delta_H(h) Delta_K(k^-1)) f(k^-1 x h) dh dk`.
pub fn rho_from_f(space: &DoubleCosetSpace, f: &TestFunction, scheme: &IntegrationScheme) -> RhoFunction {
    let (s, f2, scheme) = (space.clone(), f.clone(), *scheme);
    RhoFunction::from_fn(space, Provenance::FromF(f.label().to_string()), move |x| {
        let g = s.group();
        let est = s.kh_integral(x, f2.support(), &scheme, |k, h, y| {
            let v = f2.evaluate(y)?;
            if v == 0.0 {
                return Ok(0.0);
            }
            let w = g.modular(h) / (s.h().modular(g, h) * s.k().modular(g, &g.inverse(k)));
            Ok(w * v)
        })?;
        Ok(Estimate::new(est.value, est.error + f2.relative_error() * est.value.abs()))
    })
}

/// `|rho(k x h) - weight(k, h) rho(x)|` with its error bound.
pub fn check_covariance(space: &DoubleCosetSpace, rho: &RhoFunction, k: &Element, x: &Element, h: &Element) -> Result<Estimate> {
    if !space.k().contains(space.group(), k) || !space.h().contains(space.group(), h) {
        return Err(Error::Precondition("covariance needs k in K and h in H".into()));
    }
    let lhs = rho.evaluate(&space.group().op3(k, x, h))?;
    let rhs = rho.evaluate(x)?.scale(space.weight(k, h));
    let d = lhs - rhs;
    Ok(Estimate::new(d.value.abs(), d.error))
}

/// The unit neighbourhood `U` of a cover and its trace `U_N = U n N`.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitNeighbourhood {
    /// Finite groups: `U = U_N = N`.
    Normalizer(Vec<usize>),
    /// `U = B n B^-1` for an open chart box `B` centred at the identity
    /// (requires `N = G`, so `U_N = U`).
    SymmetricBox(Region),
}

impl UnitNeighbourhood {
    /// Signed depth: negative inside `U_N`, positive outside.
    pub fn depth(&self, group: &Group, y: &Element) -> f64 {
        match (self, y) {
            (UnitNeighbourhood::Normalizer(n), Element::Index(i)) => {
                if n.binary_search(i).is_ok() {
                    -1.0
                } else {
                    1.0
                }
            }
            (UnitNeighbourhood::SymmetricBox(b), Element::Coords(_)) => {
                let law = group.law().unwrap();
                let center = b.center();
                let excess = |z: &Element| -> f64 {
                    let c = z.coords().unwrap();
                    (0..b.dim)
                        .map(|i| {
                            let d = c[i] - center[i];
                            let d = if Some(i) == law.periodic_axis() { crate::group::wrap_angle(d) } else { d };
                            d.abs() / (0.5 * b.width(i))
                        })
                        .fold(0.0, f64::max)
                        - 1.0
                };
                excess(y).max(excess(&group.inverse(y)))
            }
            _ => f64::INFINITY,
        }
    }

    pub fn region(&self) -> Option<&Region> {
        match self {
            UnitNeighbourhood::SymmetricBox(b) => Some(b),
            UnitNeighbourhood::Normalizer(_) => None,
        }
    }
}

/// The symmetric bump `f(x) = b(x) b(x^-1)` defining `U = {f > 0}`, with
/// `f(e) = 1`. On finite groups: a random symmetric positive table on `N`.
pub fn cover_bump<R: Rng + ?Sized>(
    space: &DoubleCosetSpace,
    u_halfwidth: f64,
    rng: &mut R,
) -> Result<(TestFunction, UnitNeighbourhood)> {
    let group = space.group();
    match group.as_finite() {
        Some(g) => {
            let n = space.normalizer().members().unwrap().to_vec();
            let raw = TestFunction::random_table(g.order(), &n, 0.5, 1.5, rng, "raw");
            let mut values = vec![0.0; g.order()];
            for &x in &n {
                let (a, b) = (raw.evaluate(&Element::Index(x))?, raw.evaluate(&Element::Index(g.inv(x)))?);
                values[x] = 0.5 * (a + b);
            }
            Ok((TestFunction::table(values, "u-bump"), UnitNeighbourhood::Normalizer(n)))
        }
        None => {
            if !space.n_is_open() {
                return Err(Error::Precondition(format!("N = {} is not open; U_N has empty interior", space.normalizer().name())));
            }
            let law = group.law().unwrap();
            if !(u_halfwidth > 0.0) || (law == crate::group::ChartLaw::AffineLine && u_halfwidth >= 1.0) {
                return Err(Error::Config(format!("u_halfwidth {u_halfwidth} out of range")));
            }
            let e = law.identity();
            let boxr = Region::centered(&e, &[u_halfwidth; 3], law.dim());
            let b = TestFunction::bump(law, boxr, 1.0)?;
            let (g2, b2) = (group.clone(), b.clone());
            let f = TestFunction::from_fn(Support::Region(boxr), true, "u-bump", move |x| {
                let v = b2.evaluate(x)?;
                if v == 0.0 {
                    return Ok(0.0);
                }
                Ok(v * b2.evaluate(&g2.inverse(x))?)
            });
            Ok((f, UnitNeighbourhood::SymmetricBox(boxr)))
        }
    }
}

/// A finite set `A` with `K U_N A H` covering a compact region.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSet {
    pub points: Vec<Element>,
    pub u: UnitNeighbourhood,
    /// Certified chart box (`None`: all of a finite group).
    pub region: Option<Region>,
    pub grid: usize,
    pub margin: f64,
    /// Smallest signed depth between distinct points; above `-margin` by construction.
    pub separation: f64,
    /// Number of points checked for coverage.
    pub verified: usize,
}

const SEARCH_POINTS: usize = 9;
const COMPASS_STEPS: usize = 40;

/// `min_{k,h} depth(k^-1 x h b^-1)`: negative iff `x` is in `K U_N b H`
/// (to search precision). `+inf` when no `(k, h)` can bring `x` near `U b`.
pub fn relation_depth(space: &DoubleCosetSpace, u: &UnitNeighbourhood, x: &Element, b: &Element) -> f64 {
    let group = space.group();
    let bi = group.inverse(b);
    match (space.geometry(), u) {
        (None, _) => {
            let mut best = f64::INFINITY;
            for &k in space.k().members().unwrap() {
                for &h in space.h().members().unwrap() {
                    let y = group.op3(&group.inverse(&Element::Index(k)), x, &Element::Index(h));
                    best = best.min(u.depth(group, &group.op(&y, &bi)));
                }
            }
            best
        }
        (Some(geom), UnitNeighbourhood::SymmetricBox(ub)) => {
            let law = geom.law();
            let target = law.right_translate_region(ub, &b.coords().unwrap());
            let xc = x.coords().unwrap();
            let Some(w) = geom.windows(&xc, &target) else {
                return f64::INFINITY;
            };
            let axes: Vec<Axis> = [w.k, w.h].into_iter().flatten().collect();
            let (kc, hc) = (space.k().curve(), space.h().curve());
            let depth_at = |t: &[f64]| -> f64 {
                let mut i = 0;
                let k = match kc {
                    Some(c) => {
                        i += 1;
                        c.embed(t[0])
                    }
                    None => law.identity(),
                };
                let h = match hc {
                    Some(c) => c.embed(t[i]),
                    None => law.identity(),
                };
                let y = law.mul(&law.mul(&law.mul(&law.inv(&k), &xc), &h), &bi.coords().unwrap());
                u.depth(group, &Element::Coords(y))
            };
            // Coarse grid, then compass refinement from the best node.
            let dims: Vec<usize> = axes.iter().map(|_| SEARCH_POINTS).collect();
            let total: usize = dims.iter().product();
            let mut best_t = vec![0.0; axes.len()];
            let mut best = f64::INFINITY;
            let mut t = vec![0.0; axes.len()];
            for flat in 0..total.max(1) {
                let mut rem = flat;
                for (d, a) in axes.iter().enumerate() {
                    let j = rem % SEARCH_POINTS;
                    rem /= SEARCH_POINTS;
                    t[d] = a.lo + (a.hi - a.lo) * j as f64 / (SEARCH_POINTS - 1) as f64;
                }
                let v = depth_at(&t);
                if v < best {
                    best = v;
                    best_t.clone_from(&t);
                }
            }
            let mut step: Vec<f64> = axes.iter().map(|a| (a.hi - a.lo) / (SEARCH_POINTS - 1) as f64).collect();
            for _ in 0..COMPASS_STEPS {
                let mut improved = false;
                for d in 0..axes.len() {
                    for sign in [-1.0, 1.0] {
                        let mut cand = best_t.clone();
                        cand[d] += sign * step[d];
                        let v = depth_at(&cand);
                        if v < best {
                            best = v;
                            best_t = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step.iter_mut().for_each(|s| *s *= 0.5);
                }
            }
            best
        }
        _ => f64::INFINITY,
    }
}

/// Greedy replacement for a maximal separated set: sweep the grid (or all
/// elements of a finite group) in order, accepting `a` unless it is related
/// to an accepted point within `margin`. Coverage is then verified on the
/// sweep grid and on cell centres; failure returns the uncovered witness.
pub fn build_covering_set(
    space: &DoubleCosetSpace,
    u: &UnitNeighbourhood,
    region: Option<&Region>,
    grid: usize,
    margin: f64,
) -> Result<CoveringSet> {
    let group = space.group();
    let (candidates, checks): (Vec<Element>, Vec<Element>) = match (group.elements(), region) {
        (Some(all), _) => (all.clone(), all),
        (None, Some(r)) => {
            if grid < 2 {
                return Err(Error::Config("cover_grid must be at least 2".into()));
            }
            let cand: Vec<Element> = r.grid(grid).into_iter().map(Element::Coords).collect();
            let step: Vec<f64> = (0..r.dim).map(|i| r.width(i) / (grid - 1) as f64).collect();
            let mut inner = *r;
            for i in 0..r.dim {
                inner.lo[i] += 0.5 * step[i];
                inner.hi[i] -= 0.5 * step[i];
            }
            let mut checks = cand.clone();
            if grid > 2 {
                checks.extend(inner.grid(grid - 1).into_iter().map(Element::Coords));
            }
            for c in &cand {
                group.validate(c)?;
            }
            (cand, checks)
        }
        (None, None) => return Err(Error::Config("charted cover needs a region".into())),
    };
    // Accept every candidate not yet covered with margin; ambiguous ones are
    // accepted too, so each candidate ends up robustly covered.
    let mut points: Vec<Element> = Vec::new();
    for a in &candidates {
        if !points.iter().any(|b| relation_depth(space, u, a, b) <= -margin) {
            points.push(*a);
        }
    }
    let witness = checks
        .par_iter()
        .find_first(|x| !points.iter().any(|a| relation_depth(space, u, x, a) <= -margin.min(0.5)));
    if let Some(x) = witness {
        return Err(Error::CoverIncomplete { witness: group.label(x) });
    }
    let mut separation = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate() {
            if i != j {
                separation = separation.min(relation_depth(space, u, a, b));
            }
        }
    }
    Ok(CoveringSet {
        points,
        u: u.clone(),
        region: region.copied(),
        grid,
        margin,
        separation,
        verified: checks.len(),
    })
}

/// Covering-sum rho `sum_{a in A} rho_{f^a}`, `f^a(x) = f(x a^-1)`, verified
/// strictly positive on the cover's region (or all of a finite group).
pub fn strictly_positive_rho(
    space: &DoubleCosetSpace,
    cover: &CoveringSet,
    f: &TestFunction,
    scheme: &IntegrationScheme,
) -> Result<(RhoFunction, PositivityReport)> {
    let group = space.group();
    let e = group.identity();
    let fe = f.evaluate(&e)?;
    if !(fe > 0.0) {
        return Err(Error::Precondition("cover bump must be positive at the identity".into()));
    }
    let terms: Vec<RhoFunction> = cover
        .points
        .iter()
        .map(|a| Ok(rho_from_f(space, &f.right_translate(group, &group.inv(a)?)?, scheme)))
        .collect::<Result<_>>()?;
    let terms = Arc::new(terms);
    let t2 = terms.clone();
    let rho = RhoFunction::from_fn(space, Provenance::CoveringSum { terms: terms.len() }, move |x| {
        let mut sum = Estimate::exact(0.0);
        for t in t2.iter() {
            sum = sum + (t.direct)(x)?;
        }
        Ok(sum)
    });
    let points = positivity_grid(space, cover.region.as_ref());
    let values: Vec<(f64, usize)> = points
        .par_iter()
        .map(|x| {
            let mut used = 0;
            let mut sum = 0.0;
            for t in terms.iter() {
                let v = (t.direct)(x)?.value;
                if v != 0.0 {
                    used += 1;
                }
                sum += v;
            }
            Ok((sum, used))
        })
        .collect::<Result<_>>()?;
    let (mut min, mut argmin, mut max_terms) = (f64::INFINITY, 0, 0);
    for (i, (v, used)) in values.iter().enumerate() {
        if *v < min {
            min = *v;
            argmin = i;
        }
        max_terms = max_terms.max(*used);
    }
    let report = PositivityReport { points: points.len(), min, max_terms, cover_size: terms.len() };
    if !(min > 0.0) {
        return Err(Error::Positivity(format!("rho = {min} at {}", group.label(&points[argmin]))));
    }
    Ok((rho.mark_strictly_positive(), report))
}

/// Outcome of the positivity sweep of a covering-sum rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub points: usize,
    pub min: f64,
    /// Largest number of nonzero terms at any grid point (local finiteness).
    pub max_terms: usize,
    pub cover_size: usize,
}

/// About 10^3 grid points of the region (all elements of a finite group).
pub fn positivity_grid(space: &DoubleCosetSpace, region: Option<&Region>) -> Vec<Element> {
    match (space.group().elements(), region) {
        (Some(all), _) => all,
        (None, Some(r)) => {
            let m = (1000f64.powf(1.0 / r.dim as f64)).ceil() as usize;
            r.grid(m.max(2)).into_iter().map(Element::Coords).collect()
        }
        (None, None) => Vec::new(),
    }
}

/// `L_n rho : x -> rho(n^-1 x)`, again a rho-function when `K` is IN.
pub fn translate_rho(space: &DoubleCosetSpace, n: &Element, rho: &RhoFunction) -> Result<RhoFunction> {
    if !space.in_normalizer(n) {
        return Err(Error::Precondition(format!("{} is not in N", space.group().label(n))));
    }
    if !space.k().is_in() {
        return Err(Error::Precondition(format!("K = {} is not IN", space.k().name())));
    }
    let ni = space.group().inverse(n);
    let (r, g) = (rho.clone(), space.group().clone());
    let mut out = RhoFunction::from_fn(space, Provenance::Translated(space.group().label(n)), move |x| {
        (r.direct)(&g.op(&ni, x))
    });
    out.strictly_positive = false;
    Ok(out)
}

/// Largest `|rho(x) - rho(x')| / d(x, x')` over neighbouring grid points: a
/// sampled stand-in for uniform continuity.
pub fn lipschitz_estimate(rho: &RhoFunction, region: &Region, m: usize) -> Result<f64> {
    let group = rho.space().group();
    let pts = region.grid(m);
    let mut worst: f64 = 0.0;
    for x in &pts {
        for axis in 0..region.dim {
            let mut y = *x;
            y[axis] += region.width(axis) / (m - 1) as f64;
            if !region.contains_tol(&y, 1e-12) {
                continue;
            }
            let (a, b) = (Element::Coords(*x), Element::Coords(y));
            let d = group.distance(&a, &b);
            let (ra, rb) = (rho.evaluate(&a)?.value, rho.evaluate(&b)?.value);
            worst = worst.max((ra - rb).abs() / d);
        }
    }
    Ok(worst)
}

/// Largest relative gap between the direct and class-reduced routes.
pub fn memo_consistency<R: Rng + ?Sized>(rho: &RhoFunction, samples: &[Element], rng: &mut R) -> Result<Estimate> {
    let space = rho.space();
    let mut worst = Estimate::exact(0.0);
    for p in samples {
        let x = space.alternative(p, rng);
        let (a, b) = (rho.evaluate(&x)?, rho.evaluate_reduced(&x)?);
        let d = a - b;
        if d.value.abs() >= worst.value {
            worst = Estimate::new(d.value.abs(), d.error);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ChartLaw, FiniteGroup};
    use crate::subgroup::resolve;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(group: Group, k: &str, h: &str) -> DoubleCosetSpace {
        let (k, h) = (resolve(&group, k).unwrap(), resolve(&group, h).unwrap());
        DoubleCosetSpace::new(group, k, h).unwrap()
    }

    #[test]
    fn trivial_subgroups_give_rho_equal_f() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "e", "e");
        let f = TestFunction::table(vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0], "f");
        let rho = rho_from_f(&s, &f, &IntegrationScheme::ExactSum);
        for i in 0..6 {
            let x = Element::Index(i);
            assert_eq!(rho.evaluate(&x).unwrap().value, f.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn finite_cover_is_exhaustive() {
        let s = space(Group::finite("S4", FiniteGroup::symmetric(4)), "klein4", "<(12)>");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (f, u) = cover_bump(&s, 0.5, &mut rng).unwrap();
        let cover = build_covering_set(&s, &u, None, 0, 0.0).unwrap();
        // N = S4, so one point already covers everything.
        assert_eq!(cover.points.len(), 1);
        let (rho, rep) = strictly_positive_rho(&s, &cover, &f, &IntegrationScheme::ExactSum).unwrap();
        assert!(rep.min > 0.0 && rho.is_strictly_positive());
    }

    #[test]
    fn heisenberg_cover_on_band() {
        let g = Group::charted(ChartLaw::Heisenberg);
        let s = space(g, "center", "x-axis");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, u) = cover_bump(&s, 0.5, &mut rng).unwrap();
        let region = Region::parse("-1,1;-3,3;-1,1").unwrap();
        let cover = build_covering_set(&s, &u, Some(&region), 9, 0.02).unwrap();
        assert!(cover.points.len() >= 6 && cover.points.len() < 20, "{}", cover.points.len());
        assert!(cover.separation > -cover.margin);
    }

    #[test]
    fn affine_rho_covariance_has_nontrivial_weight() {
        let g = Group::charted(ChartLaw::AffineLine);
        let s = space(g.clone(), "e", "dilations");
        let f = TestFunction::bump(ChartLaw::AffineLine, Region::new(&[0.5, -1.0], &[2.0, 1.0]), 1.0).unwrap();
        let scheme = IntegrationScheme::tensor(64);
        let rho = rho_from_f(&s, &f, &scheme);
        let x = Element::Coords([1.3, 0.2, 0.0]);
        let h = s.h().embed(0.4);
        assert!((s.weight(&g.identity(), &h) - 0.4f64.exp()).abs() < 1e-14);
        let r = check_covariance(&s, &rho, &g.identity(), &x, &h).unwrap();
        assert!(r.value <= 1e-9, "{r:?}");
    }
}
