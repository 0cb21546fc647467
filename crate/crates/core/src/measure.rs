//! Measures on `K\G/H` built from rho-functions: the pairing `mu_rho`, the
//! lifted measure on `G`, the cocycle `lambda` and the converse direction
//! (rho from lambda, equivalence, support).

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::averaging::{dominating, section_lift, CosetFunction, CosetSupport};
use crate::coset::DoubleCosetSpace;
use crate::error::{Error, Result};
use crate::function::{ErrorTracker, TestFunction};
use crate::group::Element;
use crate::haar::integrate_haar;
use crate::integrate::{Estimate, IntegrationScheme};
use crate::rho::{Provenance, RhoFunction};

/// `mu_rho`, represented by its pairing `F -> int_G f_1 rho dx` where
/// `Q(f_1) = F` is a section lift.
#[derive(Clone, Debug)]
pub struct MeasureFunctional {
    space: DoubleCosetSpace,
    rho: RhoFunction,
    scheme: IntegrationScheme,
}

impl MeasureFunctional {
    pub fn new(space: &DoubleCosetSpace, rho: &RhoFunction, scheme: &IntegrationScheme) -> Result<Self> {
        match (space.is_finite(), scheme) {
            (true, IntegrationScheme::ExactSum) | (false, IntegrationScheme::Tensor { .. })
            | (false, IntegrationScheme::MonteCarlo { .. }) => {}
            (_, s) => return Err(Error::Config(format!("{} does not fit {}", s.describe(), space.group().name()))),
        }
        scheme.validate()?;
        Ok(Self { space: space.clone(), rho: rho.clone(), scheme: *scheme })
    }

    pub fn space(&self) -> &DoubleCosetSpace {
        &self.space
    }

    pub fn rho(&self) -> &RhoFunction {
        &self.rho
    }

    pub fn scheme(&self) -> &IntegrationScheme {
        &self.scheme
    }

    /// `int F d mu_rho`, lifting through the default dominating function.
    pub fn pair(&self, big_f: &CosetFunction) -> Result<Estimate> {
        if is_empty(big_f.support()) {
            return Ok(Estimate::exact(0.0));
        }
        let g = dominating(&self.space, big_f.support())?;
        self.pair_with(big_f, &g)
    }

    /// Pairing through an explicit dominating `g`.
    pub fn pair_with(&self, big_f: &CosetFunction, g: &TestFunction) -> Result<Estimate> {
        let lift = section_lift(&self.space, big_f, g, &self.scheme)?;
        self.integrate_density(&lift)
    }

    /// `int_G f rho dx`, with `rho` taken through the class-reduced route.
    pub fn integrate_density(&self, f: &TestFunction) -> Result<Estimate> {
        let tracker = Arc::new(ErrorTracker::default());
        let (f2, rho, t2) = (f.clone(), self.rho.clone(), tracker.clone());
        let prod = TestFunction::from_fn(f.support().clone(), f.is_nonnegative(), format!("{}*rho", f.label()), move |x| {
            let v = f2.evaluate(x)?;
            if v == 0.0 {
                return Ok(0.0);
            }
            let r = rho.evaluate_reduced(x)?;
            if r.value != 0.0 {
                t2.record(r.error / r.value.abs());
            }
            Ok(v * r.value)
        })
        .with_tracker(tracker);
        let est = integrate_haar(self.space.group(), &prod, &self.scheme)?;
        Ok(Estimate::new(est.value, est.error + f.relative_error() * est.value.abs()))
    }

    /// Per-class masses `mu(c)` (finite spaces).
    pub fn class_weights(&self) -> Result<Vec<Estimate>> {
        let n = self
            .space
            .classes()
            .ok_or_else(|| Error::Unsupported("class weights on a charted space".into()))?
            .classes
            .len();
        (0..n).map(|c| self.pair(&CosetFunction::indicator(&self.space, c)?)).collect()
    }

    /// Classes of measure zero (finite spaces).
    pub fn null_classes(&self) -> Result<Vec<usize>> {
        Ok(self.class_weights()?.iter().enumerate().filter(|(_, w)| w.value == 0.0).map(|(i, _)| i).collect())
    }

    pub fn lift(&self) -> LiftedMeasure {
        LiftedMeasure { mu: self.clone() }
    }
}

fn is_empty(s: &CosetSupport) -> bool {
    match s {
        CosetSupport::Classes(c) => c.is_empty(),
        CosetSupport::Interval(lo, hi) => !(lo <= hi),
    }
}

/// `mu~(f) = mu_rho(Q(f))`, a measure on `G`.
#[derive(Clone, Debug)]
pub struct LiftedMeasure {
    mu: MeasureFunctional,
}

impl LiftedMeasure {
    pub fn measure(&self) -> &MeasureFunctional {
        &self.mu
    }

    pub fn pair_g(&self, f: &TestFunction) -> Result<Estimate> {
        let qf = CosetFunction::averaged(&self.mu.space, f, &self.mu.scheme)?;
        self.mu.pair(&qf)
    }

    /// `int f rho dx`, which `pair_g` must reproduce.
    pub fn density_pair(&self, f: &TestFunction) -> Result<Estimate> {
        self.mu.integrate_density(f)
    }
}

fn residual(a: Estimate, b: Estimate) -> Estimate {
    let d = a - b;
    Estimate::new(d.value.abs(), d.error)
}

/// `|int Q(f) d mu - int f rho dx|`.
pub fn weil_residual(mu: &MeasureFunctional, f: &TestFunction) -> Result<Estimate> {
    let qf = CosetFunction::averaged(&mu.space, f, &mu.scheme)?;
    Ok(residual(mu.pair(&qf)?, mu.integrate_density(f)?))
}

/// `|int f rho dx|` for `f = f_0 - lift(Q(f_0))`, which `Q` annihilates.
pub fn kernel_residual(mu: &MeasureFunctional, f0: &TestFunction) -> Result<Estimate> {
    let qf = CosetFunction::averaged(&mu.space, f0, &mu.scheme)?;
    let g = dominating(&mu.space, qf.support())?;
    let lift = section_lift(&mu.space, &qf, &g, &mu.scheme)?;
    Ok(residual(mu.integrate_density(f0)?, mu.integrate_density(&lift)?))
}

/// `|pair_with(F, g1) - pair_with(F, g2)|`: independence of the lift.
pub fn lift_independence(mu: &MeasureFunctional, big_f: &CosetFunction, g1: &TestFunction, g2: &TestFunction) -> Result<Estimate> {
    Ok(residual(mu.pair_with(big_f, g1)?, mu.pair_with(big_f, g2)?))
}

/// `|mu~(f(k . h^-1)) - Delta_K(k) Delta_H(h) mu~(f)|`.
pub fn check_lift_property(lifted: &LiftedMeasure, k: &Element, h: &Element, f: &TestFunction) -> Result<Estimate> {
    let space = &lifted.mu.space;
    let g = space.group();
    if !space.k().contains(g, k) || !space.h().contains(g, h) {
        return Err(Error::Precondition("lift property needs k in K and h in H".into()));
    }
    let moved = f.two_sided(g, k, &g.inverse(h))?;
    let factor = space.k().modular(g, k) * space.h().modular(g, h);
    Ok(residual(lifted.pair_g(&moved)?, lifted.pair_g(f)?.scale(factor)))
}

/// Where a cocycle's values come from.
#[derive(Clone)]
pub enum CocycleSource {
    /// `lambda(n, p) = rho(n p^) / rho(p^)`.
    FromRho(RhoFunction),
    /// A closed-form cocycle.
    Declared { label: String, eval: Arc<dyn Fn(&Element, &Element) -> f64 + Send + Sync> },
}

impl fmt::Debug for CocycleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CocycleSource::FromRho(r) => write!(f, "FromRho({:?})", r.provenance()),
            CocycleSource::Declared { label, .. } => write!(f, "Declared({label})"),
        }
    }
}

/// `lambda : N x K\G/H -> (0, inf)`.
#[derive(Clone, Debug)]
pub struct Cocycle {
    space: DoubleCosetSpace,
    source: CocycleSource,
}

/// Cocycle of a rho-function. Needs `K` IN for representative independence.
pub fn lambda_from_rho(space: &DoubleCosetSpace, rho: &RhoFunction) -> Result<Cocycle> {
    if !space.k().is_in() {
        return Err(Error::Precondition(format!("K = {} is not IN", space.k().name())));
    }
    Ok(Cocycle { space: space.clone(), source: CocycleSource::FromRho(rho.clone()) })
}

impl Cocycle {
    pub fn declared<F>(space: &DoubleCosetSpace, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Element, &Element) -> f64 + Send + Sync + 'static,
    {
        Self { space: space.clone(), source: CocycleSource::Declared { label: label.into(), eval: Arc::new(f) } }
    }

    pub fn source(&self) -> &CocycleSource {
        &self.source
    }

    fn require_n(&self, n: &Element) -> Result<()> {
        if self.space.in_normalizer(n) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{} is not in N", self.space.group().label(n))))
        }
    }

    /// `lambda(n, KpH)` using the canonical representative of `p`.
    pub fn evaluate(&self, n: &Element, p: &Element) -> Result<Estimate> {
        let rep = self.space.project(p)?;
        self.evaluate_at_rep(n, &rep)
    }

    /// `rho(n r) / rho(r)` for an explicit representative `r`.
    pub fn evaluate_at_rep(&self, n: &Element, r: &Element) -> Result<Estimate> {
        self.require_n(n)?;
        match &self.source {
            CocycleSource::FromRho(rho) => {
                let g = self.space.group();
                let den = rho.evaluate(r)?;
                if !(den.value > 0.0) {
                    return Err(Error::DivisionDomain(format!("rho = {} at {}", den.value, g.label(r))));
                }
                Ok(rho.evaluate(&g.op(n, r))?.div(den))
            }
            CocycleSource::Declared { eval, .. } => Ok(Estimate::exact(eval(n, &self.space.canonical(r)))),
        }
    }

    /// `evaluate` through the memoized class route of `rho`; for integrands.
    pub fn evaluate_reduced(&self, n: &Element, p: &Element) -> Result<Estimate> {
        self.require_n(n)?;
        match &self.source {
            CocycleSource::FromRho(rho) => {
                let p = self.space.canonical(p);
                let den = rho.class_value(&p)?;
                if !(den.value > 0.0) {
                    return Err(Error::DivisionDomain(format!("rho = {} at {}", den.value, self.space.group().label(&p))));
                }
                Ok(rho.evaluate_reduced(&self.space.group().op(n, &p))?.div(den))
            }
            CocycleSource::Declared { eval, .. } => Ok(Estimate::exact(eval(n, &self.space.canonical(p)))),
        }
    }

    /// `lambda(n, .)` as a class function on the given support.
    pub fn class_function(&self, n: &Element, support: CosetSupport) -> Result<CosetFunction> {
        self.require_n(n)?;
        let (c, n) = (self.clone(), *n);
        let label = format!("lambda({}, .)", self.space.group().label(&n));
        Ok(CosetFunction::from_fn(support, label, move |p| c.evaluate_reduced(&n, p)))
    }

    /// Largest gap between `lambda(n, p)` at the canonical and at random
    /// alternative representatives.
    pub fn well_definedness<R: Rng + ?Sized>(&self, n: &Element, p: &Element, samples: usize, rng: &mut R) -> Result<Estimate> {
        let base = self.evaluate(n, p)?;
        let p = self.space.canonical(p);
        let mut worst = Estimate::exact(0.0);
        for _ in 0..samples {
            let r = self.space.alternative(&p, rng);
            let d = residual(self.evaluate_at_rep(n, &r)?, base);
            if d.value >= worst.value {
                worst = d;
            }
        }
        Ok(worst)
    }
}

/// `|pair(L_n F) - pair(F lambda(n, .))|`.
pub fn check_quasi_invariance(mu: &MeasureFunctional, lambda: &Cocycle, n: &Element, big_f: &CosetFunction) -> Result<Estimate> {
    if !mu.space.in_normalizer(n) {
        return Err(Error::Precondition(format!("{} is not in N", mu.space.group().label(n))));
    }
    let moved = big_f.translate(&mu.space, n)?;
    let weighted = big_f.mul(&mu.space, &lambda.class_function(n, big_f.support().clone())?);
    Ok(residual(mu.pair(&moved)?, mu.pair(&weighted)?))
}

/// `|lambda(n1 n2, p) - lambda(n1, n2 . p) lambda(n2, p)|`.
pub fn check_cocycle(lambda: &Cocycle, n1: &Element, n2: &Element, p: &Element) -> Result<Estimate> {
    let s = &lambda.space;
    let lhs = lambda.evaluate(&s.group().op(n1, n2), p)?;
    let rhs = lambda.evaluate(n1, &s.n_action(n2, p)?)? * lambda.evaluate(n2, p)?;
    Ok(residual(lhs, rhs))
}

/// `rho'(x) = c lambda(x, KH)` on `N` (zero off `N`), with `lambda(x, KH)`
/// evaluated at a random representative `r = k_0 h_0` of `KH`, and `c` fixed by
/// matching `int f_ref rho' dx` to `mu~(f_ref)`.
pub fn rho_from_lambda<R: Rng + ?Sized>(
    mu: &MeasureFunctional,
    lambda: &Cocycle,
    reference: &TestFunction,
    rng: &mut R,
) -> Result<(RhoFunction, f64)> {
    let space = &mu.space;
    if !space.n_is_open() {
        return Err(Error::Precondition(format!("N = {} is not open", space.normalizer().name())));
    }
    if !space.h_in_normalizer() {
        return Err(Error::Precondition(format!("H = {} is not contained in N", space.h().name())));
    }
    if !space.k().is_in() {
        return Err(Error::Precondition(format!("K = {} is not IN", space.k().name())));
    }
    let g = space.group();
    let r = space.alternative(&g.identity(), rng);
    let unit = {
        let (lam, s, r) = (lambda.clone(), space.clone(), r);
        RhoFunction::from_fn(space, Provenance::FromLambda { c: 1.0 }, move |x| {
            if !s.in_normalizer(x) {
                return Ok(Estimate::exact(0.0));
            }
            lam.evaluate_at_rep(x, &r)
        })
    };
    // Normalize with the reduced route (the same function on N).
    let (lam, s) = (lambda.clone(), space.clone());
    let reduced = RhoFunction::from_fn(space, Provenance::FromLambda { c: 1.0 }, move |x| {
        if !s.in_normalizer(x) {
            return Ok(Estimate::exact(0.0));
        }
        match &lam.source {
            CocycleSource::FromRho(rho) => {
                let den = rho.evaluate(&r)?;
                Ok(rho.evaluate_reduced(&s.group().op(x, &r))?.div(den))
            }
            CocycleSource::Declared { .. } => lam.evaluate_at_rep(x, &r),
        }
    });
    let target = mu.lift().pair_g(reference)?;
    let base = MeasureFunctional::new(space, &reduced, &mu.scheme)?.integrate_density(reference)?;
    if !(base.value > 0.0) {
        return Err(Error::DivisionDomain("reference pairing of lambda(., KH) vanishes".into()));
    }
    let c = target.value / base.value;
    let out = unit.scale(c);
    Ok((RhoFunction::from_fn(space, Provenance::FromLambda { c }, move |x| out.evaluate(x)), c))
}

/// `max/min - 1` of `rho'(x) / rho(x)` over points where `rho > 0`.
pub fn ratio_spread(rho_prime: &RhoFunction, rho: &RhoFunction, points: &[Element]) -> Result<Estimate> {
    let (mut lo, mut hi, mut rel_err) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for x in points {
        let (a, b) = (rho_prime.evaluate(x)?, rho.evaluate(x)?);
        if !(b.value > 0.0) {
            return Err(Error::DivisionDomain(format!("rho = {} at {}", b.value, rho.space().group().label(x))));
        }
        let q = a.value / b.value;
        lo = lo.min(q);
        hi = hi.max(q);
        rel_err = rel_err.max(a.error / a.value.abs().max(f64::MIN_POSITIVE) + b.error / b.value);
    }
    if points.is_empty() || !(lo > 0.0) {
        return Err(Error::DivisionDomain("ratio not positive".into()));
    }
    Ok(Estimate::new(hi / lo - 1.0, 2.0 * rel_err * hi / lo))
}

/// A representative of the class of `x` lying in `N` when one exists.
fn rep_in_n(space: &DoubleCosetSpace, x: &Element) -> Element {
    if let Some(classes) = space.classes() {
        let c = space.class_index(x).unwrap();
        if let Some(&m) = classes.classes[c].iter().find(|&&m| space.in_normalizer(&Element::Index(m))) {
            return Element::Index(m);
        }
    }
    space.canonical(x)
}

/// `phi(KxH) = rho_1(x) / rho_2(x)`, evaluated at a representative in `N`;
/// zero on classes where both vanish.
pub fn equivalence_density(space: &DoubleCosetSpace, rho1: &RhoFunction, rho2: &RhoFunction) -> CosetFunction {
    let support = match space.classes() {
        Some(c) => CosetSupport::Classes((0..c.classes.len()).collect()),
        None => CosetSupport::Interval(f64::NEG_INFINITY, f64::INFINITY),
    };
    let (s, r1, r2) = (space.clone(), rho1.clone(), rho2.clone());
    CosetFunction::from_fn(support, "phi", move |p| {
        let x = rep_in_n(&s, p);
        let (a, b) = (r1.class_value_or_direct(&s, &x)?, r2.class_value_or_direct(&s, &x)?);
        if b.value > 0.0 {
            Ok(a.div(b))
        } else if a.value == 0.0 {
            Ok(Estimate::exact(0.0))
        } else {
            Err(Error::DivisionDomain(format!("rho_2 = {} at {}", b.value, s.group().label(&x))))
        }
    })
}

impl RhoFunction {
    /// Memo route at canonical points, direct elsewhere.
    fn class_value_or_direct(&self, space: &DoubleCosetSpace, x: &Element) -> Result<Estimate> {
        if space.canonical(x) == *x {
            self.class_value(x)
        } else {
            self.evaluate(x)
        }
    }
}

/// Largest `|rho_1(y)/rho_2(y) - phi(KyH)|` over every element of every class
/// meeting `N` (finite spaces): `phi` is a well-defined class function.
pub fn phi_classwise(space: &DoubleCosetSpace, rho1: &RhoFunction, rho2: &RhoFunction, phi: &CosetFunction) -> Result<f64> {
    let classes = space.classes().ok_or_else(|| Error::Unsupported("classwise ratio on a charted space".into()))?;
    let mut worst: f64 = 0.0;
    for members in &classes.classes {
        for &m in members {
            let y = Element::Index(m);
            if !space.in_normalizer(&y) {
                continue;
            }
            let (a, b) = (rho1.evaluate(&y)?.value, rho2.evaluate(&y)?.value);
            let v = phi.evaluate(space, &y)?.value;
            if b > 0.0 {
                worst = worst.max((a / b - v).abs());
            } else if a != 0.0 || v != 0.0 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(worst)
}

/// `|pair_1(F) - pair_2(F phi)|`.
pub fn check_equivalence(mu1: &MeasureFunctional, mu2: &MeasureFunctional, phi: &CosetFunction, big_f: &CosetFunction) -> Result<Estimate> {
    Ok(residual(mu1.pair(big_f)?, mu2.pair(&big_f.mul(&mu2.space, phi))?))
}

/// Outcome of the support check.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    pub tested: usize,
    pub min: f64,
    pub failures: Vec<String>,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.tested > 0
    }
}

/// Every nonzero `F >= 0` in `basis` must pair to a positive number.
pub fn check_support(mu: &MeasureFunctional, basis: &[CosetFunction]) -> Result<SupportReport> {
    let mut rep = SupportReport { tested: basis.len(), min: f64::INFINITY, failures: Vec::new() };
    for f in basis {
        let v = mu.pair(f)?;
        rep.min = rep.min.min(v.value);
        if !(v.value > v.error) {
            rep.failures.push(format!("{} -> {:.3e}", f.label(), v.value));
        }
    }
    Ok(rep)
}

/// Class indicators (finite) or `count` random class bumps inside `[lo, hi]`.
pub fn support_basis<R: Rng + ?Sized>(
    space: &DoubleCosetSpace,
    interval: Option<(f64, f64)>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<CosetFunction>> {
    match (space.classes(), interval) {
        (Some(c), _) => (0..c.classes.len()).map(|i| CosetFunction::indicator(space, i)).collect(),
        (None, Some((lo, hi))) => (0..count)
            .map(|_| {
                let w = rng.gen_range(0.1..0.5) * (hi - lo);
                let a = rng.gen_range(lo..hi - w);
                CosetFunction::class_bump(space, a, a + w, 1.0)
            })
            .collect(),
        (None, None) => Err(Error::Config("charted support basis needs a class interval".into())),
    }
}

/// Residuals of `int f(n x h^-1) d mu~ = Delta_H(h) int f(x) lambda(m, q(x)) d mu~`
/// for `m = n^-1` (the form that holds) and for `m = n` (literal form).
pub fn check_two_sided_translate(lifted: &LiftedMeasure, lambda: &Cocycle, n: &Element, h: &Element, f: &TestFunction) -> Result<(Estimate, Estimate)> {
    let mu = &lifted.mu;
    let (space, g) = (&mu.space, mu.space.group());
    if !space.in_normalizer(n) || !space.h().contains(g, h) {
        return Err(Error::Precondition("needs n in N and h in H".into()));
    }
    if !space.k().is_in() {
        return Err(Error::Precondition(format!("K = {} is not IN", space.k().name())));
    }
    let lhs = lifted.pair_g(&f.two_sided(g, n, &g.inverse(h))?)?;
    let qf = CosetFunction::averaged(space, f, &mu.scheme)?;
    let dh = space.h().modular(g, h);
    let side = |m: &Element| -> Result<Estimate> {
        let weighted = qf.mul(space, &lambda.class_function(m, qf.support().clone())?);
        Ok(mu.pair(&weighted)?.scale(dh))
    };
    Ok((residual(lhs, side(&g.inverse(n))?), residual(lhs, side(n)?)))
}

/// Brute-force class masses `mu(c) = rho(c^) |c| / (|K| |H|)` (finite spaces).
pub fn class_weight_oracle(space: &DoubleCosetSpace, rho: &RhoFunction) -> Result<Vec<f64>> {
    let classes = space.classes().ok_or_else(|| Error::Unsupported("class weights on a charted space".into()))?;
    let kh = (space.k().order().unwrap() * space.h().order().unwrap()) as f64;
    classes
        .classes
        .iter()
        .map(|m| Ok(rho.evaluate(&Element::Index(m[0]))?.value * m.len() as f64 / kh))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, Group};
    use crate::rho::rho_from_f;
    use crate::subgroup::resolve;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(group: Group, k: &str, h: &str) -> DoubleCosetSpace {
        let (k, h) = (resolve(&group, k).unwrap(), resolve(&group, h).unwrap());
        DoubleCosetSpace::new(group, k, h).unwrap()
    }

    #[test]
    fn class_weights_match_oracle_on_s4() {
        let s = space(Group::finite("S4", FiniteGroup::symmetric(4)), "klein4", "<(12)>");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = TestFunction::random_table(24, &(0..24).collect::<Vec<_>>(), 0.5, 2.0, &mut rng, "f");
        let rho = rho_from_f(&s, &f, &IntegrationScheme::ExactSum);
        let mu = MeasureFunctional::new(&s, &rho, &IntegrationScheme::ExactSum).unwrap();
        let w = mu.class_weights().unwrap();
        let oracle = class_weight_oracle(&s, &rho).unwrap();
        for (a, b) in w.iter().zip(&oracle) {
            assert!((a.value - b).abs() <= 1e-12, "{a:?} {b}");
        }
    }

    #[test]
    fn zero_function_pairs_to_zero() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "<(12)>", "<(12)>");
        let rho = RhoFunction::constant(&s, 1.0).unwrap();
        let mu = MeasureFunctional::new(&s, &rho, &IntegrationScheme::ExactSum).unwrap();
        let zero = CosetFunction::class_table(&s, vec![0.0, 0.0], "0").unwrap();
        assert_eq!(mu.pair(&zero).unwrap().value, 0.0);
    }

    #[test]
    fn cocycle_at_identity_is_one() {
        let s = space(Group::finite("S4", FiniteGroup::symmetric(4)), "klein4", "<(12)>");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = TestFunction::random_table(24, &(0..24).collect::<Vec<_>>(), 0.5, 2.0, &mut rng, "f");
        let rho = rho_from_f(&s, &f, &IntegrationScheme::ExactSum);
        let lam = lambda_from_rho(&s, &rho).unwrap();
        for p in 0..24 {
            assert_eq!(lam.evaluate(&Element::Index(0), &Element::Index(p)).unwrap().value, 1.0);
        }
    }

    #[test]
    fn division_domain_on_vanishing_rho() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "<(12)>", "<(12)>");
        let f = TestFunction::indicator(6, &[0], "delta");
        let rho = rho_from_f(&s, &f, &IntegrationScheme::ExactSum);
        let lam = lambda_from_rho(&s, &rho).unwrap();
        let off = (0..6).find(|&i| s.class_index(&Element::Index(i)) != s.class_index(&Element::Index(0))).unwrap();
        assert!(matches!(lam.evaluate(&Element::Index(0), &Element::Index(off)), Err(Error::DivisionDomain(_))));
    }

    #[test]
    fn equivalence_of_scaled_rho_is_two() {
        let s = space(Group::finite("S3", FiniteGroup::symmetric(3)), "<(12)>", "<(12)>");
        let rho = RhoFunction::constant(&s, 1.5).unwrap();
        let phi = equivalence_density(&s, &rho.scale(2.0), &rho);
        for i in 0..6 {
            assert_eq!(phi.evaluate(&s, &Element::Index(i)).unwrap().value, 2.0);
        }
    }
}
