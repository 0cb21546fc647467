//! Concrete locally compact groups: finite permutation groups and groups with a
//! global coordinate chart, with their left Haar measures and modular functions.

mod chart;
mod finite;

pub use chart::{wrap_angle, ChartLaw};
pub use finite::{parse_cycles, FiniteGroup};

use rand::Rng;

use crate::error::{Error, Result};

/// A group element: an index into a finite group's table, or chart coordinates
/// (unused trailing coordinates are zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Index(usize),
    Coords([f64; 3]),
}

impl Element {
    pub fn index(&self) -> Option<usize> {
        match self {
            Element::Index(i) => Some(*i),
            Element::Coords(_) => None,
        }
    }

    pub fn coords(&self) -> Option<[f64; 3]> {
        match self {
            Element::Coords(c) => Some(*c),
            Element::Index(_) => None,
        }
    }

    /// Hashable key; coordinates are keyed by their exact bit patterns.
    pub fn key(&self) -> [u64; 3] {
        match self {
            Element::Index(i) => [*i as u64, u64::MAX, u64::MAX],
            Element::Coords(c) => {
                // Normalize -0.0 so that equal values share a key.
                let bits = |v: f64| if v == 0.0 { 0 } else { v.to_bits() };
                [bits(c[0]), bits(c[1]), bits(c[2])]
            }
        }
    }
}

/// Axis-aligned box in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub dim: usize,
}

impl Region {
    pub fn new(lo: &[f64], hi: &[f64]) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.len() <= 3);
        let mut r = Region { lo: [0.0; 3], hi: [0.0; 3], dim: lo.len() };
        r.lo[..lo.len()].copy_from_slice(lo);
        r.hi[..hi.len()].copy_from_slice(hi);
        r
    }

    pub fn centered(center: &[f64; 3], halfwidths: &[f64; 3], dim: usize) -> Self {
        let mut r = Region { lo: [0.0; 3], hi: [0.0; 3], dim };
        for i in 0..dim {
            r.lo[i] = center[i] - halfwidths[i];
            r.hi[i] = center[i] + halfwidths[i];
        }
        r
    }

    pub fn bounding(dim: usize, points: impl IntoIterator<Item = [f64; 3]>) -> Self {
        let mut r = Region { lo: [f64::INFINITY; 3], hi: [f64::NEG_INFINITY; 3], dim };
        for p in points {
            for i in 0..dim {
                r.lo[i] = r.lo[i].min(p[i]);
                r.hi[i] = r.hi[i].max(p[i]);
            }
        }
        for i in dim..3 {
            r.lo[i] = 0.0;
            r.hi[i] = 0.0;
        }
        r
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for i in 0..self.dim {
            c[i] = 0.5 * (self.lo[i] + self.hi[i]);
        }
        c
    }

    pub fn contains_tol(&self, x: &[f64; 3], tol: f64) -> bool {
        (0..self.dim).all(|i| x[i] >= self.lo[i] - tol && x[i] <= self.hi[i] + tol)
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        self.contains_tol(x, 0.0)
    }

    pub fn expanded(&self, by: f64) -> Self {
        let mut r = *self;
        for i in 0..self.dim {
            r.lo[i] -= by;
            r.hi[i] += by;
        }
        r
    }

    pub fn hull(&self, other: &Region) -> Self {
        let mut r = *self;
        for i in 0..self.dim {
            r.lo[i] = r.lo[i].min(other.lo[i]);
            r.hi[i] = r.hi[i].max(other.hi[i]);
        }
        r
    }

    pub fn intersect(&self, other: &Region) -> Option<Self> {
        let mut r = *self;
        for i in 0..self.dim {
            r.lo[i] = r.lo[i].max(other.lo[i]);
            r.hi[i] = r.hi[i].min(other.hi[i]);
            if r.lo[i] > r.hi[i] {
                return None;
            }
        }
        Some(r)
    }

    pub fn corners(&self) -> Vec<[f64; 3]> {
        (0..1usize << self.dim)
            .map(|mask| {
                let mut c = [0.0; 3];
                for i in 0..self.dim {
                    c[i] = if mask & (1 << i) == 0 { self.lo[i] } else { self.hi[i] };
                }
                c
            })
            .collect()
    }

    /// Uniform grid with `m >= 2` points per axis, endpoints included.
    pub fn grid(&self, m: usize) -> Vec<[f64; 3]> {
        assert!(m >= 2);
        let mut out = vec![[0.0; 3]];
        for axis in 0..self.dim {
            let mut next = Vec::with_capacity(out.len() * m);
            for p in &out {
                for j in 0..m {
                    let mut q = *p;
                    q[axis] = self.lo[axis] + self.width(axis) * j as f64 / (m - 1) as f64;
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for axis in text.split(';') {
            let mut parts = axis.split(',').map(|s| s.trim().parse::<f64>());
            let a = parts.next()?.ok()?;
            let b = parts.next()?.ok()?;
            if parts.next().is_some() || !(a <= b) {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        if lo.is_empty() || lo.len() > 3 {
            return None;
        }
        Some(Region::new(&lo, &hi))
    }
}

/// How a group is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupKind {
    Finite(FiniteGroup),
    Charted(ChartLaw),
}

/// A concrete group with its Haar normalization and modular function.
///
/// Finite groups carry counting measure; charted groups carry the density
/// declared by their [`ChartLaw`].
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    name: String,
    kind: GroupKind,
}

impl Group {
    pub fn finite(name: impl Into<String>, group: FiniteGroup) -> Self {
        Self { name: name.into(), kind: GroupKind::Finite(group) }
    }

    pub fn charted(law: ChartLaw) -> Self {
        Self { name: law.name().to_string(), kind: GroupKind::Charted(law) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn as_finite(&self) -> Option<&FiniteGroup> {
        match &self.kind {
            GroupKind::Finite(g) => Some(g),
            GroupKind::Charted(_) => None,
        }
    }

    pub fn law(&self) -> Option<ChartLaw> {
        match &self.kind {
            GroupKind::Charted(l) => Some(*l),
            GroupKind::Finite(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::Finite(_))
    }

    pub fn order(&self) -> Option<usize> {
        self.as_finite().map(FiniteGroup::order)
    }

    /// Chart dimension (0 for finite groups).
    pub fn dim(&self) -> usize {
        self.law().map_or(0, ChartLaw::dim)
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            GroupKind::Finite(_) => Element::Index(0),
            GroupKind::Charted(l) => Element::Coords(l.identity()),
        }
    }

    pub fn validate(&self, x: &Element) -> Result<()> {
        let ok = match (&self.kind, x) {
            (GroupKind::Finite(g), Element::Index(i)) => *i < g.order(),
            (GroupKind::Charted(l), Element::Coords(c)) => l.in_domain(c),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DomainViolation { group: self.name.clone(), detail: format!("{x:?}") })
        }
    }

    /// Checked product.
    pub fn mul(&self, x: &Element, y: &Element) -> Result<Element> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.op(x, y))
    }

    /// Checked inverse.
    pub fn inv(&self, x: &Element) -> Result<Element> {
        self.validate(x)?;
        Ok(self.inverse(x))
    }

    /// Unchecked product for inner loops; panics if an element has the wrong kind.
    #[inline]
    pub fn op(&self, x: &Element, y: &Element) -> Element {
        match (&self.kind, x, y) {
            (GroupKind::Finite(g), Element::Index(i), Element::Index(j)) => {
                Element::Index(g.mul(*i, *j))
            }
            (GroupKind::Charted(l), Element::Coords(a), Element::Coords(b)) => {
                Element::Coords(l.mul(a, b))
            }
            _ => panic!("element kind does not match group {}", self.name),
        }
    }

    #[inline]
    pub fn op3(&self, x: &Element, y: &Element, z: &Element) -> Element {
        self.op(&self.op(x, y), z)
    }

    #[inline]
    pub fn inverse(&self, x: &Element) -> Element {
        match (&self.kind, x) {
            (GroupKind::Finite(g), Element::Index(i)) => Element::Index(g.inv(*i)),
            (GroupKind::Charted(l), Element::Coords(a)) => Element::Coords(l.inv(a)),
            _ => panic!("element kind does not match group {}", self.name),
        }
    }

    /// `Delta_G(x)` with the convention `int f(xy) dx = Delta_G(y)^-1 int f(x) dx`.
    pub fn modular(&self, x: &Element) -> f64 {
        match (&self.kind, x) {
            (GroupKind::Charted(l), Element::Coords(a)) => l.modular(a),
            _ => 1.0,
        }
    }

    pub fn haar_density(&self, x: &Element) -> f64 {
        match (&self.kind, x) {
            (GroupKind::Charted(l), Element::Coords(a)) => l.haar_density(a),
            _ => 1.0,
        }
    }

    /// All elements of a finite group, in index order.
    pub fn elements(&self) -> Option<Vec<Element>> {
        self.order().map(|n| (0..n).map(Element::Index).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        match &self.kind {
            GroupKind::Finite(g) => Element::Index(rng.gen_range(0..g.order())),
            GroupKind::Charted(l) => {
                let b = l.sample_box();
                let mut c = [0.0; 3];
                for i in 0..l.dim() {
                    c[i] = if *l == ChartLaw::AffineLine && i == 0 {
                        (rng.gen_range(b.lo[0].ln()..b.hi[0].ln())).exp()
                    } else {
                        rng.gen_range(b.lo[i]..b.hi[i])
                    };
                }
                Element::Coords(c)
            }
        }
    }

    /// Max coordinate distance (angles modulo 2 pi); 0/1 for finite groups.
    pub fn distance(&self, x: &Element, y: &Element) -> f64 {
        match (&self.kind, x, y) {
            (GroupKind::Charted(l), Element::Coords(a), Element::Coords(b)) => l.distance(a, b),
            _ => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn label(&self, x: &Element) -> String {
        match (&self.kind, x) {
            (GroupKind::Finite(g), Element::Index(i)) if *i < g.order() => g.label(*i).to_string(),
            (_, Element::Coords(c)) => {
                let d = self.dim().max(1);
                let parts: Vec<String> = c[..d].iter().map(|v| format!("{v:.6}")).collect();
                format!("({})", parts.join(", "))
            }
            _ => format!("{x:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_mul_rejects_out_of_chart() {
        let g = Group::charted(ChartLaw::AffineLine);
        let bad = Element::Coords([-1.0, 0.0, 0.0]);
        assert!(matches!(
            g.mul(&bad, &g.identity()),
            Err(Error::DomainViolation { .. })
        ));
        let s3 = Group::finite("S3", FiniteGroup::symmetric(3));
        assert!(s3.mul(&Element::Index(6), &Element::Index(0)).is_err());
    }

    #[test]
    fn identity_axiom() {
        let g = Group::charted(ChartLaw::Heisenberg);
        let x = Element::Coords([0.3, -1.2, 2.0]);
        assert_eq!(g.mul(&x, &g.identity()).unwrap(), x);
    }

    #[test]
    fn region_parse_and_grid() {
        let r = Region::parse("-1,1; 0,2").unwrap();
        assert_eq!(r.dim, 2);
        assert_eq!(r.grid(3).len(), 9);
        assert!(Region::parse("1,0").is_none());
        assert!(Region::parse("a,b").is_none());
    }

    #[test]
    fn element_keys_identify_signed_zero() {
        assert_eq!(Element::Coords([0.0, -0.0, 1.0]).key(), Element::Coords([-0.0, 0.0, 1.0]).key());
    }
}
