//! The double coset space `K\G/H`: canonical representatives, the normalizer
//! `N` of `K` and its action `n . KxH = KnxH`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::group::{wrap_angle, ChartLaw, Element, FiniteGroup, Group, Region};
use crate::integrate::{integrate_box, Axis, Estimate, IntegrationScheme};
use crate::subgroup::{Curve, Shape, Subgroup};

/// Closed-form double coset structure of a charted scenario. Each class space
/// is one-dimensional with a real class parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Heisenberg, `K` = center, `H` = x-axis. `k^-1 x h = (x+s, y, z-c)`,
    /// canonical form `(0, y, 0)`, class parameter `y`.
    HeisenbergCenterXAxis,
    /// ax+b, `K = {e}`, `H` = translations. Canonical form `(a, 0)`, parameter `a`.
    AxbTranslations,
    /// ax+b, `K = {e}`, `H` = dilations. Canonical form `(1, b)`, parameter `b`.
    AxbDilations,
    /// SE(2), `K = H = SO(2)`. Canonical form `(0, (r, 0))`, parameter `r = |t|`.
    Se2Rotations,
}

/// Parameter windows of `(k, h)` for which `k^-1 x h` can meet a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    pub k: Option<Axis>,
    pub h: Option<Axis>,
}

impl Geometry {
    fn detect(law: ChartLaw, k: &Subgroup, h: &Subgroup) -> Result<Self> {
        use Curve::*;
        let kt = matches!(k.shape(), Shape::Trivial);
        match (law, k.curve(), h.curve()) {
            (ChartLaw::Heisenberg, Some(HeisenbergCenter), Some(HeisenbergXAxis)) => Ok(Geometry::HeisenbergCenterXAxis),
            (ChartLaw::AffineLine, None, Some(AxbTranslations)) if kt => Ok(Geometry::AxbTranslations),
            (ChartLaw::AffineLine, None, Some(AxbDilations)) if kt => Ok(Geometry::AxbDilations),
            (ChartLaw::Se2, Some(Se2Rotations), Some(Se2Rotations)) => Ok(Geometry::Se2Rotations),
            _ => Err(Error::Unsupported(format!(
                "no closed-form double coset structure for K={}, H={} in {}",
                k.name(),
                h.name(),
                law.name()
            ))),
        }
    }

    pub fn law(self) -> ChartLaw {
        match self {
            Geometry::HeisenbergCenterXAxis => ChartLaw::Heisenberg,
            Geometry::AxbTranslations | Geometry::AxbDilations => ChartLaw::AffineLine,
            Geometry::Se2Rotations => ChartLaw::Se2,
        }
    }

    /// Class parameter of any element of the class.
    #[inline]
    pub fn class_param(self, x: &[f64; 3]) -> f64 {
        match self {
            Geometry::HeisenbergCenterXAxis => x[1],
            Geometry::AxbTranslations => x[0],
            Geometry::AxbDilations => x[1],
            Geometry::Se2Rotations => x[1].hypot(x[2]),
        }
    }

    /// Canonical representative with class parameter `t`.
    #[inline]
    pub fn class_rep(self, t: f64) -> [f64; 3] {
        match self {
            Geometry::HeisenbergCenterXAxis => [0.0, t, 0.0],
            Geometry::AxbTranslations => [t, 0.0, 0.0],
            Geometry::AxbDilations => [1.0, t, 0.0],
            Geometry::Se2Rotations => [0.0, t, 0.0],
        }
    }

    #[inline]
    pub fn canonical(self, x: &[f64; 3]) -> [f64; 3] {
        self.class_rep(self.class_param(x))
    }

    /// Parameters `(k, p, h)` with `x = k p h` and `p` canonical.
    pub fn factor(self, x: &[f64; 3]) -> (Option<f64>, [f64; 3], Option<f64>) {
        let p = self.canonical(x);
        match self {
            Geometry::HeisenbergCenterXAxis => (Some(x[2]), p, Some(x[0])),
            Geometry::AxbTranslations => (None, p, Some(x[1] / x[0])),
            Geometry::AxbDilations => (None, p, Some(x[0].ln())),
            Geometry::Se2Rotations => {
                let alpha = x[2].atan2(x[1]);
                (Some(alpha), p, Some(wrap_angle(x[0] - alpha)))
            }
        }
    }

    /// Windows of `(k, h)` parameters such that `k^-1 x h` lies in `b`;
    /// `None` if no pair does.
    pub fn windows(self, x: &[f64; 3], b: &Region) -> Option<Windows> {
        match self {
            Geometry::HeisenbergCenterXAxis => {
                if x[1] < b.lo[1] || x[1] > b.hi[1] {
                    return None;
                }
                Some(Windows {
                    k: Some(Axis::new(x[2] - b.hi[2], x[2] - b.lo[2])),
                    h: Some(Axis::new(b.lo[0] - x[0], b.hi[0] - x[0])),
                })
            }
            Geometry::AxbTranslations => {
                if x[0] < b.lo[0] || x[0] > b.hi[0] {
                    return None;
                }
                Some(Windows { k: None, h: Some(Axis::new((b.lo[1] - x[1]) / x[0], (b.hi[1] - x[1]) / x[0])) })
            }
            Geometry::AxbDilations => {
                if x[1] < b.lo[1] || x[1] > b.hi[1] {
                    return None;
                }
                Some(Windows { k: None, h: Some(Axis::new((b.lo[0] / x[0]).ln(), (b.hi[0] / x[0]).ln())) })
            }
            Geometry::Se2Rotations => {
                let (rmin, rmax) = self.radial_range(b);
                let r = self.class_param(x);
                if r < rmin || r > rmax {
                    return None;
                }
                Some(Windows { k: Some(Axis::periodic(-PI, PI)), h: Some(Axis::periodic(-PI, PI)) })
            }
        }
    }

    fn radial_range(self, b: &Region) -> (f64, f64) {
        let near = |lo: f64, hi: f64| if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
        let far = |lo: f64, hi: f64| lo.abs().max(hi.abs());
        (near(b.lo[1], b.hi[1]).hypot(near(b.lo[2], b.hi[2])), far(b.lo[1], b.hi[1]).hypot(far(b.lo[2], b.hi[2])))
    }

    /// Range of class parameters of classes meeting the box.
    pub fn class_interval(self, b: &Region) -> (f64, f64) {
        match self {
            Geometry::HeisenbergCenterXAxis | Geometry::AxbDilations => (b.lo[1], b.hi[1]),
            Geometry::AxbTranslations => (b.lo[0], b.hi[0]),
            Geometry::Se2Rotations => self.radial_range(b),
        }
    }

    /// A chart box whose classes cover `[lo - delta, hi + delta]`; a bump on
    /// it averages to a positive function on `(lo - delta, hi + delta)`.
    pub fn cover_box(self, lo: f64, hi: f64, delta: f64) -> Region {
        match self {
            Geometry::HeisenbergCenterXAxis => Region::new(&[-1.0, lo - delta, -1.0], &[1.0, hi + delta, 1.0]),
            Geometry::AxbTranslations => Region::new(&[(lo - delta).max(0.5 * lo), -1.0], &[hi + delta, 1.0]),
            Geometry::AxbDilations => Region::new(&[0.5, lo - delta], &[2.0, hi + delta]),
            Geometry::Se2Rotations => {
                let r = hi + delta;
                Region::new(&[-PI, -r, -r], &[PI, r, r])
            }
        }
    }

    /// Name of the class parameter.
    pub fn param_name(self) -> &'static str {
        match self {
            Geometry::HeisenbergCenterXAxis => "y",
            Geometry::AxbTranslations => "a",
            Geometry::AxbDilations => "b",
            Geometry::Se2Rotations => "|t|",
        }
    }
}

/// Exhaustive class data of a finite double coset space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteClasses {
    /// Canonical (minimal-index) representative of each element's class.
    pub canon: Vec<usize>,
    /// Class index of each element; classes are ordered by representative.
    pub class_of: Vec<usize>,
    /// Sorted members of each class.
    pub classes: Vec<Vec<usize>>,
}

impl FiniteClasses {
    fn build(g: &FiniteGroup, k: &[usize], h: &[usize]) -> Self {
        let n = g.order();
        let mut canon = vec![usize::MAX; n];
        let mut classes = Vec::new();
        let mut class_of = vec![usize::MAX; n];
        for x in 0..n {
            if canon[x] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> =
                k.iter().flat_map(|&a| h.iter().map(move |&b| (a, b))).map(|(a, b)| g.mul(g.mul(a, x), b)).collect();
            members.sort_unstable();
            members.dedup();
            // Elements are visited in index order, so x is the minimum.
            for &m in &members {
                canon[m] = x;
                class_of[m] = classes.len();
            }
            classes.push(members);
        }
        Self { canon, class_of, classes }
    }

    pub fn representative(&self, class: usize) -> usize {
        self.classes[class][0]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Finite(FiniteClasses),
    Charted(Geometry),
}

/// The triple `(K, G, H)` with its normalizer and class structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCosetSpace {
    group: Group,
    k: Subgroup,
    h: Subgroup,
    n: Subgroup,
    n_open: bool,
    structure: Structure,
}

/// `N = {g : gK = Kg}` by exhaustive set comparison; finite groups only.
/// Returns `N` and whether it is open (always, for discrete groups).
pub fn compute_normalizer(group: &Group, k: &Subgroup) -> Result<(Subgroup, bool)> {
    let g = group
        .as_finite()
        .ok_or_else(|| Error::Unsupported(format!("normalizer of {} in charted {} is declared, not computed", k.name(), group.name())))?;
    let members = k.members().ok_or_else(|| Error::Precondition("finite subgroup expected".into()))?;
    let mut n = Vec::new();
    for x in 0..g.order() {
        let mut left: Vec<usize> = members.iter().map(|&m| g.mul(x, m)).collect();
        let mut right: Vec<usize> = members.iter().map(|&m| g.mul(m, x)).collect();
        left.sort_unstable();
        right.sort_unstable();
        if left == right {
            n.push(x);
        }
    }
    Ok((Subgroup::new(format!("N({})", k.name()), Shape::Finite(n)), true))
}

/// Deterministic substream for point-wise Monte Carlo integrals.
pub(crate) fn point_stream(key: [u64; 3]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for w in key {
        h ^= w;
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    h
}

impl DoubleCosetSpace {
    pub fn new(group: Group, k: Subgroup, h: Subgroup) -> Result<Self> {
        if group.is_finite() {
            let g = group.as_finite().unwrap();
            let (km, hm) = match (k.members(), h.members()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Config("finite group needs finite subgroups".into())),
            };
            let structure = Structure::Finite(FiniteClasses::build(g, km, hm));
            let (n, n_open) = compute_normalizer(&group, &k)?;
            return Ok(Self { group, k, h, n, n_open, structure });
        }
        let law = group.law().unwrap();
        let geometry = Geometry::detect(law, &k, &h)?;
        // Declared normalizers: K trivial or central is normal (N = G);
        // SO(2) is self-normalizing in SE(2).
        let (n, n_open) = match (k.shape(), geometry) {
            (Shape::Trivial, _) | (_, Geometry::HeisenbergCenterXAxis) => (Subgroup::whole(&group), true),
            (_, Geometry::Se2Rotations) => (Subgroup::new("so2", Shape::Curve(Curve::Se2Rotations)), false),
            _ => unreachable!(),
        };
        Ok(Self { group, k, h, n, n_open, structure: Structure::Charted(geometry) })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn k(&self) -> &Subgroup {
        &self.k
    }

    pub fn h(&self) -> &Subgroup {
        &self.h
    }

    pub fn normalizer(&self) -> &Subgroup {
        &self.n
    }

    pub fn n_is_open(&self) -> bool {
        self.n_open
    }

    pub fn k_is_normal(&self) -> bool {
        match (&self.n.shape(), self.group.order()) {
            (Shape::Whole, _) => true,
            (Shape::Finite(m), Some(order)) => m.len() == order,
            _ => false,
        }
    }

    pub fn h_in_normalizer(&self) -> bool {
        match (self.h.shape(), self.n.shape()) {
            (_, Shape::Whole) => true,
            (Shape::Finite(h), Shape::Finite(n)) => h.iter().all(|x| n.binary_search(x).is_ok()),
            (Shape::Curve(a), Shape::Curve(b)) => a == b,
            (Shape::Trivial, _) => true,
            _ => false,
        }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn classes(&self) -> Option<&FiniteClasses> {
        match &self.structure {
            Structure::Finite(c) => Some(c),
            Structure::Charted(_) => None,
        }
    }

    pub fn geometry(&self) -> Option<Geometry> {
        match self.structure {
            Structure::Charted(g) => Some(g),
            Structure::Finite(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.group.is_finite()
    }

    /// Unchecked canonical representative.
    #[inline]
    pub fn canonical(&self, x: &Element) -> Element {
        match (&self.structure, x) {
            (Structure::Finite(c), Element::Index(i)) => Element::Index(c.canon[*i]),
            (Structure::Charted(g), Element::Coords(v)) => Element::Coords(g.canonical(v)),
            _ => panic!("element kind does not match {}", self.group.name()),
        }
    }

    /// `q(x)`: the canonical representative of `KxH`.
    pub fn project(&self, x: &Element) -> Result<Element> {
        self.group.validate(x)?;
        Ok(self.canonical(x))
    }

    /// Hashable key of the class of `x`.
    #[inline]
    pub fn class_key(&self, x: &Element) -> [u64; 3] {
        self.canonical(x).key()
    }

    /// Finite class index of `x`.
    pub fn class_index(&self, x: &Element) -> Option<usize> {
        match (&self.structure, x) {
            (Structure::Finite(c), Element::Index(i)) => c.class_of.get(*i).copied(),
            _ => None,
        }
    }

    /// Real class parameter of `x` (charted).
    pub fn class_param(&self, x: &Element) -> Option<f64> {
        match (&self.structure, x) {
            (Structure::Charted(g), Element::Coords(v)) => Some(g.class_param(v)),
            _ => None,
        }
    }

    /// Canonical representative with class parameter `t` (charted).
    pub fn class_rep(&self, t: f64) -> Element {
        Element::Coords(self.geometry().expect("charted space").class_rep(t))
    }

    pub fn in_normalizer(&self, n: &Element) -> bool {
        self.n.contains(&self.group, n)
    }

    fn require_n(&self, n: &Element) -> Result<()> {
        if self.in_normalizer(n) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{} is not in N = {}", self.group.label(n), self.n.name())))
        }
    }

    /// `phi(n, KpH) = KnpH`.
    pub fn n_action(&self, n: &Element, p: &Element) -> Result<Element> {
        self.require_n(n)?;
        self.group.validate(p)?;
        Ok(self.canonical(&self.group.op(n, p)))
    }

    /// `Delta_K(k) Delta_H(h) / Delta_G(h)` for the factorization `x = k p h`.
    pub fn covariance_weight(&self, x: &Element) -> f64 {
        match (&self.structure, x) {
            (Structure::Charted(g), Element::Coords(v)) => {
                let (_, _, th) = g.factor(v);
                match (th, self.h.shape()) {
                    (Some(t), Shape::Curve(_)) => {
                        let h = self.h.embed(t);
                        self.h.modular(&self.group, &h) / self.group.modular(&h)
                    }
                    _ => 1.0,
                }
            }
            // Finite groups are unimodular.
            _ => 1.0,
        }
    }

    /// Weight `Delta_K(k) Delta_H(h) / Delta_G(h)` for explicit `k`, `h`.
    pub fn weight(&self, k: &Element, h: &Element) -> f64 {
        self.k.modular(&self.group, k) * self.h.modular(&self.group, h) / self.group.modular(h)
    }

    pub fn sample_k<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        self.k.sample(&self.group, rng)
    }

    pub fn sample_h<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        self.h.sample(&self.group, rng)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        self.n.sample(&self.group, rng)
    }

    /// Random alternative representative `k p h` of the class of `p`.
    pub fn alternative<R: Rng + ?Sized>(&self, p: &Element, rng: &mut R) -> Element {
        let (k, h) = (self.sample_k(rng), self.sample_h(rng));
        self.group.op3(&k, p, &h)
    }

    /// `int_K int_H phi(k, h, k^-1 x h) dh dk` where the integrand vanishes
    /// unless `k^-1 x h` lies in `support`.
    pub fn kh_integral<F>(
        &self,
        x: &Element,
        support: &crate::function::Support,
        scheme: &IntegrationScheme,
        integrand: F,
    ) -> Result<Estimate>
    where
        F: Fn(&Element, &Element, &Element) -> Result<f64> + Sync,
    {
        match &self.structure {
            Structure::Finite(_) => {
                let g = self.group.as_finite().unwrap();
                let xi = x.index().ok_or_else(|| Error::Precondition("finite element expected".into()))?;
                let mut sum = 0.0;
                for &k in self.k.members().unwrap() {
                    let kx = g.mul(g.inv(k), xi);
                    for &h in self.h.members().unwrap() {
                        let y = Element::Index(g.mul(kx, h));
                        sum += integrand(&Element::Index(k), &Element::Index(h), &y)?;
                    }
                }
                Ok(Estimate::exact(sum))
            }
            Structure::Charted(geom) => {
                let law = geom.law();
                let xc = x.coords().ok_or_else(|| Error::Precondition("charted element expected".into()))?;
                let b = support
                    .region()
                    .ok_or_else(|| Error::IntegrationDomain("charted integrand without a support box".into()))?;
                let Some(w) = geom.windows(&xc, b) else {
                    return Ok(Estimate::exact(0.0));
                };
                let axes: Vec<Axis> = [w.k, w.h].into_iter().flatten().collect();
                let (kc, hc) = (self.k.curve(), self.h.curve());
                let scheme = scheme.with_stream(point_stream(x.key()));
                integrate_box(&axes, &scheme, |t| {
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
                    let y = law.mul(&law.mul(&law.inv(&k), &xc), &h);
                    integrand(&Element::Coords(k), &Element::Coords(h), &Element::Coords(y))
                })
            }
        }
    }

    /// Report line describing the space.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "G={} K={} H={} N={} N-open={} K-normal={} K-IN={}",
            self.group.name(),
            self.k.name(),
            self.h.name(),
            self.n.name(),
            self.n_open,
            self.k_is_normal(),
            self.k.is_in()
        );
        match &self.structure {
            Structure::Finite(c) => {
                s.push_str(&format!(" classes={} sizes={:?}", c.classes.len(), c.sizes()));
                if let Some(m) = self.n.members() {
                    let g = self.group.as_finite().unwrap();
                    let labels: Vec<&str> = m.iter().map(|&i| g.label(i)).collect();
                    s.push_str(&format!(" N-elements={{{}}}", labels.join(",")));
                }
            }
            Structure::Charted(g) => s.push_str(&format!(" class-parameter={}", g.param_name())),
        }
        s
    }
}

/// `|int_K f(k) dk - int_K f(n k n^-1) dk|` with its error bound.
pub fn check_in_property(
    space: &DoubleCosetSpace,
    n: &Element,
    f: &TestFunction,
    scheme: &IntegrationScheme,
) -> Result<Estimate> {
    space.require_n(n)?;
    let group = space.group();
    let ni = group.inverse(n);
    let conj = f.two_sided(group, n, &ni)?;
    let over_k = |func: &TestFunction| -> Result<Estimate> {
        match space.k().shape() {
            Shape::Finite(m) => {
                let mut s = 0.0;
                for &i in m {
                    s += func.evaluate(&Element::Index(i))?;
                }
                Ok(Estimate::exact(s))
            }
            Shape::Trivial => Ok(Estimate::exact(func.evaluate(&group.identity())?)),
            Shape::Curve(c) => {
                let r = func
                    .support()
                    .region()
                    .ok_or_else(|| Error::IntegrationDomain("support box expected".into()))?;
                match c.param_window(r) {
                    None => Ok(Estimate::exact(0.0)),
                    Some(axis) => integrate_box(&[axis], scheme, |t| func.evaluate(&Element::Coords(c.embed(t[0])))),
                }
            }
            Shape::Whole => Err(Error::Unsupported("K = G".into())),
        }
    };
    let d = over_k(f)? - over_k(&conj)?;
    Ok(Estimate::new(d.value.abs(), d.error))
}

/// Largest defect of idempotence and representative independence of `q`
/// (exhaustive on finite spaces, `samples` random `(k, x, h)` on charted ones).
pub fn representative_residual<R: Rng + ?Sized>(space: &DoubleCosetSpace, samples: usize, rng: &mut R) -> f64 {
    let g = space.group();
    match space.classes() {
        Some(c) => {
            let fg = g.as_finite().unwrap();
            let mut bad = 0usize;
            for x in 0..fg.order() {
                let p = c.canon[x];
                bad += usize::from(c.canon[p] != p);
                for &k in space.k().members().unwrap() {
                    for &h in space.h().members().unwrap() {
                        bad += usize::from(c.canon[fg.mul(fg.mul(k, x), h)] != p);
                    }
                }
            }
            bad as f64
        }
        None => (0..samples)
            .map(|_| {
                let x = g.sample(rng);
                let p = space.canonical(&x);
                let idem = g.distance(&space.canonical(&p), &p);
                let moved = space.canonical(&space.alternative(&x, rng));
                idem.max(g.distance(&moved, &p))
            })
            .fold(0.0, f64::max),
    }
}

/// Largest defect of `e . p = p` and `n1 . (n2 . p) = (n1 n2) . p`.
pub fn action_residual<R: Rng + ?Sized>(space: &DoubleCosetSpace, samples: usize, rng: &mut R) -> Result<f64> {
    let g = space.group();
    let mut worst: f64 = 0.0;
    let mut one = |n1: &Element, n2: &Element, p: &Element| -> Result<()> {
        let e = space.n_action(&g.identity(), p)?;
        worst = worst.max(g.distance(&e, &space.canonical(p)));
        let lhs = space.n_action(n1, &space.n_action(n2, p)?)?;
        let rhs = space.n_action(&g.op(n1, n2), p)?;
        worst = worst.max(g.distance(&lhs, &rhs));
        Ok(())
    };
    match (space.classes(), space.normalizer().members()) {
        (Some(c), Some(n)) => {
            for &a in n {
                for &b in n {
                    for cls in 0..c.classes.len() {
                        one(&Element::Index(a), &Element::Index(b), &Element::Index(c.representative(cls)))?;
                    }
                }
            }
        }
        _ => {
            for _ in 0..samples {
                let (n1, n2) = (space.sample_n(rng), space.sample_n(rng));
                let p = space.canonical(&g.sample(rng));
                one(&n1, &n2, &p)?;
            }
        }
    }
    Ok(worst)
}

/// Finite spaces: the action table agrees with `q(n x)` for every `n` in `N`
/// and every `x` in `G` (well-definedness). Returns the number of mismatches.
pub fn action_table_mismatches(space: &DoubleCosetSpace) -> Result<usize> {
    let c = space.classes().ok_or_else(|| Error::Unsupported("exhaustive action table on charted space".into()))?;
    let g = space.group().as_finite().unwrap();
    let mut bad = 0;
    for &n in space.normalizer().members().unwrap() {
        for x in 0..g.order() {
            let via_rep = space.n_action(&Element::Index(n), &Element::Index(c.canon[x]))?;
            let direct = Element::Index(c.canon[g.mul(n, x)]);
            bad += usize::from(via_rep != direct);
        }
    }
    Ok(bad)
}

/// Finite spaces: normalizer is a subgroup containing `K`, classes partition `G`.
pub fn structure_defects(space: &DoubleCosetSpace) -> Result<Vec<String>> {
    let c = space.classes().ok_or_else(|| Error::Unsupported("exhaustive structure check on charted space".into()))?;
    let g = space.group().as_finite().unwrap();
    let mut out = Vec::new();
    let n = space.normalizer().members().unwrap();
    for &a in n {
        if n.binary_search(&g.inv(a)).is_err() {
            out.push(format!("N not closed under inverse at {}", g.label(a)));
        }
        for &b in n {
            if n.binary_search(&g.mul(a, b)).is_err() {
                out.push(format!("N not closed under product {}*{}", g.label(a), g.label(b)));
            }
        }
    }
    for &k in space.k().members().unwrap() {
        if n.binary_search(&k).is_err() {
            out.push(format!("K element {} outside N", g.label(k)));
        }
    }
    let total: usize = c.sizes().iter().sum();
    let mut seen = vec![false; g.order()];
    for class in &c.classes {
        for &m in class {
            if std::mem::replace(&mut seen[m], true) {
                out.push(format!("classes overlap at {}", g.label(m)));
            }
        }
    }
    if total != g.order() {
        out.push(format!("class sizes sum to {total}, |G| = {}", g.order()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroup::resolve;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn finite_space(g: FiniteGroup, name: &str, k: &str, h: &str) -> DoubleCosetSpace {
        let group = Group::finite(name, g);
        let (k, h) = (resolve(&group, k).unwrap(), resolve(&group, h).unwrap());
        DoubleCosetSpace::new(group, k, h).unwrap()
    }

    #[test]
    fn s3_two_classes_of_sizes_two_and_four() {
        let s = finite_space(FiniteGroup::symmetric(3), "S3", "<(12)>", "<(12)>");
        let mut sizes = s.classes().unwrap().sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 4]);
        let g = s.group().as_finite().unwrap();
        assert_eq!(s.normalizer().members().unwrap(), &[0, g.index_of("(12)").unwrap()]);
    }

    #[test]
    fn normal_klein_four() {
        let s = finite_space(FiniteGroup::symmetric(4), "S4", "klein4", "<(12)>");
        assert!(s.k_is_normal());
        assert_eq!(structure_defects(&s).unwrap(), Vec::<String>::new());
        assert_eq!(action_table_mismatches(&s).unwrap(), 0);
    }

    #[test]
    fn heisenberg_projection_and_action() {
        let g = Group::charted(ChartLaw::Heisenberg);
        let s = DoubleCosetSpace::new(g.clone(), resolve(&g, "center").unwrap(), resolve(&g, "x-axis").unwrap()).unwrap();
        let p = s.project(&Element::Coords([0.3, -1.25, 2.0])).unwrap();
        assert_eq!(p, Element::Coords([0.0, -1.25, 0.0]));
        let n = Element::Coords([0.4, 0.5, -0.7]);
        assert_eq!(s.n_action(&n, &p).unwrap(), Element::Coords([0.0, -0.75, 0.0]));
        assert!(s.k_is_normal() && s.n_is_open());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(representative_residual(&s, 100, &mut rng) < 1e-12);
        assert!(action_residual(&s, 100, &mut rng).unwrap() < 1e-9);
    }

    #[test]
    fn se2_normalizer_is_not_open() {
        let g = Group::charted(ChartLaw::Se2);
        let k = resolve(&g, "so2").unwrap();
        let s = DoubleCosetSpace::new(g.clone(), k.clone(), k).unwrap();
        assert!(!s.n_is_open());
        let off = Element::Coords([0.1, 1.0, 0.0]);
        assert!(matches!(s.n_action(&off, &s.class_rep(1.0)), Err(Error::Precondition(_))));
        assert!(matches!(compute_normalizer(&g, s.k()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn factorization_reassembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (law, k, h) in [
            (ChartLaw::Heisenberg, "center", "x-axis"),
            (ChartLaw::AffineLine, "e", "translations"),
            (ChartLaw::AffineLine, "e", "dilations"),
            (ChartLaw::Se2, "so2", "so2"),
        ] {
            let g = Group::charted(law);
            let s = DoubleCosetSpace::new(g.clone(), resolve(&g, k).unwrap(), resolve(&g, h).unwrap()).unwrap();
            let geom = s.geometry().unwrap();
            for _ in 0..100 {
                let x = g.sample(&mut rng);
                let (tk, p, th) = geom.factor(&x.coords().unwrap());
                let ke = tk.map_or(g.identity(), |t| s.k().embed(t));
                let he = th.map_or(g.identity(), |t| s.h().embed(t));
                let back = g.op3(&ke, &Element::Coords(p), &he);
                assert!(g.distance(&back, &x) < 1e-12, "{law:?} {x:?} {back:?}");
            }
        }
    }
}
