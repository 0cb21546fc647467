//! Closed subgroups embedded in a catalog group.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{wrap_angle, ChartLaw, Element, Group, Region};
use crate::integrate::Axis;

/// One-parameter subgroups of the charted groups, with their parameter
/// chosen so that Lebesgue measure in the parameter is Haar measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// `{(0, 0, c)}` in the Heisenberg group.
    HeisenbergCenter,
    /// `{(s, 0, 0)}` in the Heisenberg group.
    HeisenbergXAxis,
    /// `{(1, t)}` in ax+b.
    AxbTranslations,
    /// `{(e^u, 0)}` in ax+b; Haar measure `du = ds/s`.
    AxbDilations,
    /// `{(theta, 0)}` in SE(2).
    Se2Rotations,
}

impl Curve {
    pub fn law(self) -> ChartLaw {
        match self {
            Curve::HeisenbergCenter | Curve::HeisenbergXAxis => ChartLaw::Heisenberg,
            Curve::AxbTranslations | Curve::AxbDilations => ChartLaw::AffineLine,
            Curve::Se2Rotations => ChartLaw::Se2,
        }
    }

    #[inline]
    pub fn embed(self, t: f64) -> [f64; 3] {
        match self {
            Curve::HeisenbergCenter => [0.0, 0.0, t],
            Curve::HeisenbergXAxis => [t, 0.0, 0.0],
            Curve::AxbTranslations => [1.0, t, 0.0],
            Curve::AxbDilations => [t.exp(), 0.0, 0.0],
            Curve::Se2Rotations => [wrap_angle(t), 0.0, 0.0],
        }
    }

    /// Parameter of `x` if it lies on the curve (to within `tol`).
    pub fn param(self, x: &[f64; 3], tol: f64) -> Option<f64> {
        let z = |i: usize| x[i].abs() <= tol;
        match self {
            Curve::HeisenbergCenter => (z(0) && z(1)).then_some(x[2]),
            Curve::HeisenbergXAxis => (z(1) && z(2)).then_some(x[0]),
            Curve::AxbTranslations => ((x[0] - 1.0).abs() <= tol).then_some(x[1]),
            Curve::AxbDilations => (z(1) && x[0] > 0.0).then(|| x[0].ln()),
            Curve::Se2Rotations => (z(1) && z(2)).then_some(x[0]),
        }
    }

    pub fn periodic(self) -> bool {
        self == Curve::Se2Rotations
    }

    pub fn compact(self) -> bool {
        self.periodic()
    }

    /// Parameter interval used for random elements.
    pub fn sample_range(self) -> (f64, f64) {
        match self {
            Curve::Se2Rotations => (-PI, PI),
            Curve::AxbDilations => (-1.0, 1.0),
            _ => (-2.0, 2.0),
        }
    }

    /// Parameters `t` with `embed(t)` in the box, as an integration axis
    /// (`None` if the curve misses the box).
    pub fn param_window(self, r: &Region) -> Option<Axis> {
        let has = |i: usize, v: f64| r.lo[i] <= v && v <= r.hi[i];
        match self {
            Curve::HeisenbergCenter => (has(0, 0.0) && has(1, 0.0)).then(|| Axis::new(r.lo[2], r.hi[2])),
            Curve::HeisenbergXAxis => (has(1, 0.0) && has(2, 0.0)).then(|| Axis::new(r.lo[0], r.hi[0])),
            Curve::AxbTranslations => has(0, 1.0).then(|| Axis::new(r.lo[1], r.hi[1])),
            Curve::AxbDilations => has(1, 0.0).then(|| Axis::new(r.lo[0].ln(), r.hi[0].ln())),
            Curve::Se2Rotations => (has(1, 0.0) && has(2, 0.0)).then(|| Axis::periodic(-PI, PI)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Curve::HeisenbergCenter => "center",
            Curve::HeisenbergXAxis => "x-axis",
            Curve::AxbTranslations => "translations",
            Curve::AxbDilations => "dilations",
            Curve::Se2Rotations => "so2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `{e}` in a charted group.
    Trivial,
    /// Sorted member indices in a finite group.
    Finite(Vec<usize>),
    Curve(Curve),
    /// The whole parent group.
    Whole,
}

/// A closed subgroup with its own Haar data. All catalog subgroups other than
/// `Whole` are abelian or finite, hence unimodular.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgroup {
    name: String,
    shape: Shape,
}

const MEMBER_TOL: f64 = 1e-12;

impl Subgroup {
    pub fn new(name: impl Into<String>, shape: Shape) -> Self {
        Self { name: name.into(), shape }
    }

    pub fn trivial(group: &Group) -> Self {
        if group.is_finite() {
            Self::new("e", Shape::Finite(vec![0]))
        } else {
            Self::new("e", Shape::Trivial)
        }
    }

    pub fn whole(group: &Group) -> Self {
        match group.order() {
            Some(n) => Self::new(group.name(), Shape::Finite((0..n).collect())),
            None => Self::new(group.name(), Shape::Whole),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn curve(&self) -> Option<Curve> {
        match self.shape {
            Shape::Curve(c) => Some(c),
            _ => None,
        }
    }

    pub fn members(&self) -> Option<&[usize]> {
        match &self.shape {
            Shape::Finite(m) => Some(m),
            _ => None,
        }
    }

    pub fn order(&self) -> Option<usize> {
        match &self.shape {
            Shape::Finite(m) => Some(m.len()),
            Shape::Trivial => Some(1),
            _ => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(&self.shape, Shape::Trivial) || self.members().is_some_and(|m| m.len() == 1)
    }

    /// Number of integration parameters (0 for discrete subgroups).
    pub fn param_dim(&self, group: &Group) -> usize {
        match self.shape {
            Shape::Curve(_) => 1,
            Shape::Whole => group.dim(),
            _ => 0,
        }
    }

    /// Finite and compact subgroups are IN; so are central ones.
    pub fn is_in(&self) -> bool {
        match self.shape {
            Shape::Trivial | Shape::Finite(_) => true,
            Shape::Curve(c) => c.compact() || c == Curve::HeisenbergCenter,
            Shape::Whole => false,
        }
    }

    pub fn is_compact(&self) -> bool {
        match self.shape {
            Shape::Trivial | Shape::Finite(_) => true,
            Shape::Curve(c) => c.compact(),
            Shape::Whole => false,
        }
    }

    pub fn contains(&self, group: &Group, x: &Element) -> bool {
        if group.validate(x).is_err() {
            return false;
        }
        match (&self.shape, x) {
            (Shape::Finite(m), Element::Index(i)) => m.binary_search(i).is_ok(),
            (Shape::Trivial, Element::Coords(_)) => group.distance(x, &group.identity()) <= MEMBER_TOL,
            (Shape::Curve(c), Element::Coords(v)) => c.param(v, MEMBER_TOL).is_some(),
            (Shape::Whole, _) => true,
            _ => false,
        }
    }

    /// Subgroup element with parameter `t` (curves only).
    pub fn embed(&self, t: f64) -> Element {
        match self.shape {
            Shape::Curve(c) => Element::Coords(c.embed(t)),
            _ => panic!("embed on a non-curve subgroup {}", self.name),
        }
    }

    /// Modular function of the subgroup itself (`Delta_H`, `Delta_K`).
    pub fn modular(&self, group: &Group, x: &Element) -> f64 {
        match self.shape {
            Shape::Whole => group.modular(x),
            _ => 1.0,
        }
    }

    pub fn elements(&self, group: &Group) -> Option<Vec<Element>> {
        match &self.shape {
            Shape::Finite(m) => Some(m.iter().map(|&i| Element::Index(i)).collect()),
            Shape::Trivial => Some(vec![group.identity()]),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, group: &Group, rng: &mut R) -> Element {
        match &self.shape {
            Shape::Finite(m) => Element::Index(m[rng.gen_range(0..m.len())]),
            Shape::Trivial => group.identity(),
            Shape::Curve(c) => {
                let (lo, hi) = c.sample_range();
                Element::Coords(c.embed(rng.gen_range(lo..hi)))
            }
            Shape::Whole => group.sample(rng),
        }
    }

    /// Exhaustive (finite) or sampled check that the embedding is a
    /// homomorphism landing in the membership predicate. Returns the largest
    /// coordinate defect.
    pub fn embedding_residual<R: Rng + ?Sized>(&self, group: &Group, samples: usize, rng: &mut R) -> Result<f64> {
        match &self.shape {
            Shape::Finite(m) => {
                let g = group.as_finite().ok_or_else(|| Error::Precondition("finite subgroup of charted group".into()))?;
                for &a in m {
                    for &b in m {
                        if m.binary_search(&g.mul(a, b)).is_err() {
                            return Ok(1.0);
                        }
                    }
                    if m.binary_search(&g.inv(a)).is_err() {
                        return Ok(1.0);
                    }
                }
                Ok(0.0)
            }
            Shape::Curve(c) => {
                let (lo, hi) = c.sample_range();
                let mut worst: f64 = 0.0;
                for _ in 0..samples {
                    let (s, t) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
                    let prod = group.op(&self.embed(s), &self.embed(t));
                    worst = worst.max(group.distance(&prod, &self.embed(s + t)));
                    if !self.contains(group, &self.embed(s)) {
                        return Ok(f64::INFINITY);
                    }
                }
                Ok(worst)
            }
            Shape::Trivial | Shape::Whole => Ok(0.0),
        }
    }
}

/// Resolve a catalog subgroup name inside `group`.
///
/// Finite groups accept `e`, `klein4` and generator lists such as `<(12)>` or
/// `<(12)(34), (13)(24)>`; charted groups accept `e` and their curve names.
pub fn resolve(group: &Group, name: &str) -> Result<Subgroup> {
    let name = name.trim();
    if name == "e" {
        return Ok(Subgroup::trivial(group));
    }
    if name == group.name() || name == "G" {
        return Ok(Subgroup::whole(group));
    }
    match group.law() {
        None => {
            let g = group.as_finite().unwrap();
            let gens_text = if name == "klein4" {
                "(12)(34),(13)(24)"
            } else if let Some(inner) = name.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
                inner
            } else {
                return Err(Error::Config(format!("unknown subgroup {name:?} of {}", group.name())));
            };
            let mut gens = Vec::new();
            for part in split_generators(gens_text) {
                let idx = g.index_of(&part).ok_or_else(|| {
                    Error::Config(format!("generator {part:?} is not an element of {}", group.name()))
                })?;
                gens.push(idx);
            }
            Ok(Subgroup::new(name, Shape::Finite(g.subgroup_generated(&gens))))
        }
        Some(law) => {
            let curve = [
                Curve::HeisenbergCenter,
                Curve::HeisenbergXAxis,
                Curve::AxbTranslations,
                Curve::AxbDilations,
                Curve::Se2Rotations,
            ]
            .into_iter()
            .find(|c| c.name() == name && c.law() == law)
            .ok_or_else(|| Error::Config(format!("unknown subgroup {name:?} of {}", group.name())))?;
            Ok(Subgroup::new(name, Shape::Curve(curve)))
        }
    }
}

/// Split `(12)(34),(13)(24)` into products separated by commas outside parentheses.
fn split_generators(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' | ';' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn resolve_finite_subgroups() {
        let s4 = Group::finite("S4", FiniteGroup::symmetric(4));
        assert_eq!(resolve(&s4, "klein4").unwrap().order(), Some(4));
        assert_eq!(resolve(&s4, "<(123)>").unwrap().order(), Some(3));
        assert_eq!(resolve(&s4, "<(12)(34), (13)(24)>").unwrap().order(), Some(4));
        assert_eq!(resolve(&s4, "e").unwrap().order(), Some(1));
        assert!(resolve(&s4, "<(15)>").is_err());
        assert!(resolve(&s4, "center").is_err());
    }

    #[test]
    fn curves_are_one_parameter_subgroups() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (law, name) in [
            (ChartLaw::Heisenberg, "center"),
            (ChartLaw::Heisenberg, "x-axis"),
            (ChartLaw::AffineLine, "translations"),
            (ChartLaw::AffineLine, "dilations"),
            (ChartLaw::Se2, "so2"),
        ] {
            let g = Group::charted(law);
            let s = resolve(&g, name).unwrap();
            assert!(s.embedding_residual(&g, 200, &mut rng).unwrap() < 1e-12, "{name}");
        }
        assert!(resolve(&Group::charted(ChartLaw::Se2), "center").is_err());
    }

    #[test]
    fn membership() {
        let g = Group::charted(ChartLaw::AffineLine);
        let d = resolve(&g, "dilations").unwrap();
        assert!(d.contains(&g, &Element::Coords([3.0, 0.0, 0.0])));
        assert!(!d.contains(&g, &Element::Coords([3.0, 0.1, 0.0])));
    }
}
