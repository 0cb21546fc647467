//! `run_scenario`: group-core, coset, averaging, rho and measure checks, in
//! that order, each with its own seeded stream so that the report does not
//! depend on scheduling.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::averaging::{
    check_intertwining, dominating, fubini_residual, q_apply, section_lift, unit_on_compact, CosetFunction,
    CosetSupport,
};
use crate::coset::{
    action_residual, action_table_mismatches, check_in_property, representative_residual, structure_defects,
    DoubleCosetSpace, Geometry,
};
use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::group::{ChartLaw, Element, Region};
use crate::haar::{
    axiom_residual, integrate_haar, left_invariance_residual, min_haar_density, modular_homomorphism_residual,
    modular_residual,
};
use crate::integrate::{Estimate, IntegrationScheme};
use crate::measure::{
    check_cocycle, check_two_sided_translate, check_equivalence, check_lift_property, check_quasi_invariance, check_support,
    class_weight_oracle, equivalence_density, kernel_residual, lambda_from_rho, lift_independence, phi_classwise,
    ratio_spread, rho_from_lambda, support_basis, weil_residual, Cocycle, MeasureFunctional,
};
use crate::rho::{
    build_covering_set, check_covariance, cover_bump, lipschitz_estimate, memo_consistency, positivity_grid,
    rho_from_f, strictly_positive_rho, translate_rho, CoveringSet, PositivityReport, RhoFunction,
};
use crate::subgroup::resolve;

use super::catalog::build_group;
use super::config::ScenarioConfig;
use super::report::{Record, Report, Status};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Run the checks of a scenario concurrently (report order is unchanged).
    pub parallel: bool,
}

/// Decision margin of the cover relation test.
const COVER_MARGIN: f64 = 0.02;

/// Shared state built once per scenario.
struct Ctx {
    cfg: ScenarioConfig,
    space: DoubleCosetSpace,
    scheme: IntegrationScheme,
    finite: bool,
    region: Option<Region>,
    interval: Option<(f64, f64)>,
    rho_f: RhoFunction,
    cover: Option<CoveringSet>,
    positivity: PositivityReport,
    rho: RhoFunction,
    mu: MeasureFunctional,
    lambda: Option<Cocycle>,
    roundtrip: Result<(RhoFunction, f64)>,
}

type CheckFn = fn(&Ctx, &mut ChaCha8Rng) -> Result<Vec<Record>>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("group-axioms", group_axioms),
    ("modular-homomorphism", modular_homomorphism),
    ("haar-density", haar_density),
    ("haar-left-invariance", haar_left_invariance),
    ("modular-residual", modular_check),
    ("modular-certificate", modular_certificate),
    ("haar-cross-scheme", haar_cross_scheme),
    ("subgroup-embedding", subgroup_embedding),
    ("coset-partition", coset_partition),
    ("coset-representatives", coset_representatives),
    ("coset-action", coset_action),
    ("in-property", in_property),
    ("q-linearity", q_linearity),
    ("q-positivity", q_positivity),
    ("q-representatives", q_representatives),
    ("q-support", q_support),
    ("section-lift", section_lift_check),
    ("unit-on-compact", unit_on_compact_check),
    ("intertwining", intertwining),
    ("fubini", fubini),
    ("rho-f-covariance", rho_f_covariance),
    ("rho-f-linearity", rho_f_linearity),
    ("cover", cover_records),
    ("rho-positivity", rho_positivity),
    ("rho-covariance", rho_covariance),
    ("rho-memo", rho_memo),
    ("translate-rho", translate_rho_check),
    ("rho-continuity", rho_continuity),
    ("weil", weil),
    ("weil-kernel", weil_kernel),
    ("pair-lift-independence", pair_lift_independence),
    ("class-weights", class_weights),
    ("lift-property", lift_property),
    ("lambda-identity", lambda_identity),
    ("lambda-well-defined", lambda_well_defined),
    ("lambda-oracle", lambda_oracle),
    ("lambda-invariant", lambda_invariant),
    ("quasi-invariance", quasi_invariance),
    ("cocycle", cocycle),
    ("roundtrip", roundtrip),
    ("equivalence", equivalence),
    ("support", support),
    ("support-counterexample", support_counterexample),
    ("two-sided-translate", two_sided_translate),
];

/// Names of all checks in report order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Resolve group, subgroups and scheme. Errors here are configuration errors.
pub fn build_space(cfg: &ScenarioConfig) -> Result<DoubleCosetSpace> {
    let g = build_group(&cfg.group)?;
    let (k, h) = (resolve(&g, &cfg.k)?, resolve(&g, &cfg.h)?);
    match (g.is_finite(), &cfg.scheme) {
        (true, IntegrationScheme::ExactSum) | (false, IntegrationScheme::Tensor { .. })
        | (false, IntegrationScheme::MonteCarlo { .. }) => {}
        (_, s) => return Err(Error::Config(format!("scheme {} does not fit group {}", s.describe(), g.name()))),
    }
    DoubleCosetSpace::new(g, k, h).map_err(|e| match e {
        Error::Unsupported(m) => Error::Config(m),
        other => other,
    })
}

/// Run every check of a scenario. `Err` only for configuration errors; check
/// failures and aborted setups are reported as records.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Report> {
    let start = Instant::now();
    let space = build_space(cfg)?;
    let region = match (space.is_finite(), &cfg.cover_region) {
        (true, _) => None,
        (false, Some(r)) if r.dim == space.group().dim() => Some(*r),
        (false, Some(r)) => {
            return Err(Error::Config(format!("cover_region has {} axes, {} needs {}", r.dim, cfg.group, space.group().dim())))
        }
        (false, None) => return Err(Error::Config(format!("charted scenario {} needs cover_region", cfg.name))),
    };
    let mut report = Report {
        scenario: cfg.name.clone(),
        config: cfg.echo(),
        space: space.describe(),
        records: Vec::new(),
        timings: Vec::new(),
    };
    let ctx = match setup(cfg, space, region) {
        Ok(c) => c,
        Err(e) => {
            report.records.push(Record::new("setup", "scenario construction", Status::Fail).detail(e.to_string()));
            report.timings.push(("total".into(), start.elapsed().as_secs_f64()));
            return Ok(report);
        }
    };
    report.timings.push(("setup".into(), start.elapsed().as_secs_f64()));

    let run_one = |(i, (name, f)): (usize, &(&str, CheckFn))| -> (Vec<Record>, f64) {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64 + 1);
        let recs = match f(&ctx, &mut rng) {
            Ok(r) => r,
            Err(e) => vec![Record::new(name, "check aborted", Status::Fail).detail(e.to_string())],
        };
        (recs, t.elapsed().as_secs_f64())
    };
    let results: Vec<(Vec<Record>, f64)> = if opts.parallel {
        CHECKS.par_iter().enumerate().map(run_one).collect()
    } else {
        CHECKS.iter().enumerate().map(run_one).collect()
    };
    for ((name, _), (recs, secs)) in CHECKS.iter().zip(results) {
        report.records.extend(recs);
        report.timings.push(((*name).into(), secs));
    }
    report.timings.push(("total".into(), start.elapsed().as_secs_f64()));
    Ok(report)
}

fn setup(cfg: &ScenarioConfig, space: DoubleCosetSpace, region: Option<Region>) -> Result<Ctx> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let finite = space.is_finite();
    let scheme = cfg.scheme;
    let interval = match (space.geometry(), &region) {
        (Some(g), Some(r)) => Some(g.class_interval(r)),
        _ => None,
    };
    let f_rho = random_f_in(&space, interval, &mut rng)?;
    let rho_f = rho_from_f(&space, &f_rho, &scheme);

    let (cover, rho, positivity) = if finite || space.n_is_open() {
        let (f_u, u) = cover_bump(&space, cfg.u_halfwidth, &mut rng)?;
        let cover = build_covering_set(&space, &u, region.as_ref(), cfg.cover_grid, COVER_MARGIN)?;
        let (rho, pos) = strictly_positive_rho(&space, &cover, &f_u, &scheme)?;
        (Some(cover), rho, pos)
    } else {
        // No open N: use rho_f for a bump dominating the region's classes.
        let (lo, hi) = interval.unwrap();
        let g = dominating(&space, &CosetSupport::Interval(lo, hi))?;
        let rho = rho_from_f(&space, &g, &scheme);
        let pts = positivity_grid(&space, region.as_ref());
        let vals: Vec<f64> = pts.par_iter().map(|x| Ok(rho.evaluate(x)?.value)).collect::<Result<_>>()?;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::Positivity(format!("dominating rho_f has minimum {min}")));
        }
        (None, rho, PositivityReport { points: pts.len(), min, max_terms: 1, cover_size: 0 })
    };
    let mu = MeasureFunctional::new(&space, &rho, &scheme)?;
    let lambda = lambda_from_rho(&space, &rho).ok();
    let roundtrip = match &lambda {
        Some(l) => {
            let reference = reference_f(&space, interval, &mut rng)?;
            rho_from_lambda(&mu, l, &reference, &mut rng)
        }
        None => Err(Error::Precondition(format!("K = {} is not IN", space.k().name()))),
    };
    Ok(Ctx {
        cfg: cfg.clone(),
        space,
        scheme,
        finite,
        region,
        interval,
        rho_f,
        cover,
        positivity,
        rho,
        mu,
        lambda,
        roundtrip,
    })
}

// ---------------------------------------------------------------- helpers

/// Random nonnegative test function; charted bumps keep their classes inside
/// `interval` (when given) and their chart box inside the domain.
fn random_f_in<R: Rng + ?Sized>(space: &DoubleCosetSpace, interval: Option<(f64, f64)>, rng: &mut R) -> Result<TestFunction> {
    let g = space.group();
    if let Some(fg) = g.as_finite() {
        let n = fg.order();
        let mut members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        if members.is_empty() {
            members.push(rng.gen_range(0..n));
        }
        return Ok(TestFunction::random_table(n, &members, 0.5, 1.5, rng, "f"));
    }
    let law = g.law().unwrap();
    let (center, hw) = match law {
        ChartLaw::Heisenberg => {
            let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            (c, [rng.gen_range(0.4..1.0), rng.gen_range(0.4..1.0), rng.gen_range(0.4..1.0)])
        }
        ChartLaw::AffineLine => {
            let a = rng.gen_range(0.9..1.4);
            (
                [a, rng.gen_range(-0.4..0.4), 0.0],
                [rng.gen_range(0.15..0.35) * a, rng.gen_range(0.2..0.5), 0.0],
            )
        }
        ChartLaw::Se2 => (
            [0.0, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            [std::f64::consts::PI, rng.gen_range(0.3..0.6), rng.gen_range(0.3..0.6)],
        ),
    };
    let mut region = law.full_angle(Region::centered(&center, &hw, law.dim()));
    if let (Some(geom), Some((lo, hi))) = (space.geometry(), interval) {
        // Squeeze the class-parameter axis into the interval.
        let axis = match geom {
            Geometry::HeisenbergCenterXAxis | Geometry::AxbDilations => Some(1),
            Geometry::AxbTranslations => Some(0),
            Geometry::Se2Rotations => None,
        };
        if let Some(a) = axis {
            region.lo[a] = region.lo[a].max(lo);
            region.hi[a] = region.hi[a].min(hi);
            if !(region.hi[a] - region.lo[a] > 0.05) {
                let m = 0.5 * (lo + hi);
                region.lo[a] = m - 0.25 * (hi - lo);
                region.hi[a] = m + 0.25 * (hi - lo);
            }
        }
    }
    TestFunction::bump(law, region, rng.gen_range(0.5..1.5))
}

/// Reference function for the converse construction: positive on `N`.
fn reference_f<R: Rng + ?Sized>(space: &DoubleCosetSpace, interval: Option<(f64, f64)>, rng: &mut R) -> Result<TestFunction> {
    match (space.group().order(), space.normalizer().members()) {
        (Some(n), Some(m)) => Ok(TestFunction::random_table(n, m, 0.5, 1.5, rng, "f_ref")),
        _ => random_f_in(space, interval, rng),
    }
}

impl Ctx {
    fn tol_exact_or(&self, charted: f64) -> f64 {
        if self.finite {
            self.cfg.tol.exact
        } else {
            charted
        }
    }

    /// Integration-backed residuals. Finite: `value <= tol.exact`. Charted:
    /// `value <= min(slack * error, error_budget)` and `error <= error_budget`.
    fn judge(&self, name: &str, law: &str, ests: &[Estimate]) -> Record {
        let t = &self.cfg.tol;
        if ests.is_empty() {
            return Record::new(name, law, Status::Skip).detail("no inputs");
        }
        let mut ok = true;
        // Shown input: a failing one if any, then the largest residual/tolerance.
        let (mut worst, mut worst_key) = (ests[0], (false, f64::NEG_INFINITY));
        let mut worst_tol = 0.0;
        for e in ests {
            let tol = if self.finite { t.exact } else { (t.slack * e.error).min(t.error_budget) };
            let pass = e.value <= tol && (self.finite || e.error <= t.error_budget);
            ok &= pass;
            let ratio = if e.value.is_nan() {
                f64::INFINITY
            } else if tol > 0.0 {
                e.value / tol
            } else if e.value > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            let key = (!pass, ratio);
            if key > worst_key {
                (worst, worst_key, worst_tol) = (*e, key, tol);
            }
        }
        let status = if ok { Status::Pass } else { Status::Fail };
        let err = if self.finite { None } else { Some(worst.error) };
        Record::new(name, law, status).values(worst.value, err, worst_tol).detail(format!("{} inputs", ests.len()))
    }

    fn judge_abs(&self, name: &str, law: &str, value: f64, tol: f64) -> Record {
        let status = if value <= tol { Status::Pass } else { Status::Fail };
        Record::new(name, law, status).values(value, None, tol)
    }

    fn class_points<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Element> {
        match self.space.classes() {
            Some(c) => (0..c.classes.len()).map(|i| Element::Index(c.representative(i))).collect(),
            None => {
                let (lo, hi) = self.interval.unwrap();
                (0..count).map(|_| self.space.class_rep(rng.gen_range(lo..=hi))).collect()
            }
        }
    }

    fn n_elements<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Element> {
        match self.space.normalizer().members() {
            Some(m) => m.iter().map(|&i| Element::Index(i)).collect(),
            None => (0..count).map(|_| self.space.sample_n(rng)).collect(),
        }
    }

    fn in_interval(&self, p: &Element) -> bool {
        match (self.interval, self.space.class_param(p)) {
            (Some((lo, hi)), Some(t)) => lo <= t && t <= hi,
            _ => true,
        }
    }

    /// Random `n` in `N` moving every class of `[a, b]` inside the interval.
    fn n_keeping<R: Rng + ?Sized>(&self, a: f64, b: f64, rng: &mut R) -> Result<Element> {
        for _ in 0..1000 {
            let n = self.space.sample_n(rng);
            let ends = [self.space.class_rep(a), self.space.class_rep(b)];
            let mut ok = true;
            for p in &ends {
                ok &= self.in_interval(&self.space.n_action(&n, p)?);
            }
            if ok {
                return Ok(n);
            }
        }
        Ok(self.space.group().identity())
    }

    fn random_f<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TestFunction> {
        random_f_in(&self.space, self.interval, rng)
    }

    /// Random nonnegative class function supported inside the interval.
    fn random_class_fn<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CosetFunction> {
        match self.space.classes() {
            Some(c) => {
                let n = c.classes.len();
                let mut v: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.5..1.5) } else { 0.0 }).collect();
                if v.iter().all(|&x| x == 0.0) {
                    v[rng.gen_range(0..n)] = 1.0;
                }
                CosetFunction::class_table(&self.space, v, "F")
            }
            None => {
                let (lo, hi) = self.interval.unwrap();
                let w = rng.gen_range(0.2..0.5) * (hi - lo);
                let a = rng.gen_range(lo..hi - w);
                CosetFunction::class_bump(&self.space, a, a + w, rng.gen_range(0.5..1.5))
            }
        }
    }

    fn charted_samples(&self, floor: usize) -> usize {
        self.cfg.samples.max(floor)
    }
}

// ---------------------------------------------------------------- group core

fn group_axioms(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let v = axiom_residual(c.space.group(), 1000, rng);
    Ok(vec![c.judge_abs("group-axioms", "associativity, inverse, identity", v, c.tol_exact_or(c.cfg.tol.axiom))])
}

fn modular_homomorphism(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let v = modular_homomorphism_residual(c.space.group(), 1000, rng);
    Ok(vec![c.judge_abs("modular-homomorphism", "Delta(xy) = Delta(x) Delta(y)", v, c.tol_exact_or(c.cfg.tol.axiom))])
}

fn haar_density(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let m = min_haar_density(c.space.group(), 1000, rng);
    let status = if m > 0.0 { Status::Pass } else { Status::Fail };
    Ok(vec![Record::new("haar-density", "Haar density positive", status).detail(format!("min density {m:.6e}"))])
}

fn haar_left_invariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let g = c.space.group();
    let mut ests = Vec::new();
    for _ in 0..c.cfg.samples {
        let f = c.random_f(rng)?;
        ests.push(left_invariance_residual(g, &f, &g.sample(rng), &c.scheme)?);
    }
    Ok(vec![c.judge("haar-left-invariance", "int f(yx) dx = int f dx", &ests)])
}

fn modular_check(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let g = c.space.group();
    let mut ests = Vec::new();
    for _ in 0..c.cfg.samples {
        let f = c.random_f(rng)?;
        ests.push(modular_residual(g, &f, &g.sample(rng), &c.scheme)?);
    }
    Ok(vec![c.judge("modular-residual", "int f(xy) dx = Delta(y)^-1 int f dx", &ests)])
}

fn modular_certificate(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let g = c.space.group();
    let scheme = c.scheme.doubled();
    let mut worst = Estimate::exact(0.0);
    for _ in 0..3 {
        let f = c.random_f(rng)?;
        let r = modular_residual(g, &f, &g.sample(rng), &scheme)?;
        if r.value >= worst.value {
            worst = r;
        }
    }
    let tol = c.tol_exact_or(c.cfg.tol.modular);
    let mut rec = c.judge_abs("modular-certificate", "declared Delta_G at doubled resolution", worst.value, tol);
    rec.error = (!c.finite).then_some(worst.error);
    Ok(vec![rec.detail(scheme.describe())])
}

fn haar_cross_scheme(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    if c.finite {
        return Ok(vec![]);
    }
    let g = c.space.group();
    let f = c.random_f(rng)?;
    let t = integrate_haar(g, &f, &c.scheme)?;
    let mc = integrate_haar(g, &f, &IntegrationScheme::monte_carlo(200_000, c.cfg.seed))?;
    let d = (t.value - mc.value).abs();
    let tol = c.cfg.tol.slack * (t.error + mc.error);
    let mut rec = c.judge_abs("haar-cross-scheme", "tensor and Monte Carlo Haar integrals agree", d, tol);
    rec.error = Some(t.error + mc.error);
    Ok(vec![rec])
}

fn subgroup_embedding(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let g = c.space.group();
    let tol = c.tol_exact_or(c.cfg.tol.axiom);
    let k = c.space.k().embedding_residual(g, 100, rng)?;
    let h = c.space.h().embedding_residual(g, 100, rng)?;
    Ok(vec![
        c.judge_abs("subgroup-embedding-K", "K embedding is a homomorphism", k, tol),
        c.judge_abs("subgroup-embedding-H", "H embedding is a homomorphism", h, tol),
    ])
}

// ---------------------------------------------------------------- coset space

fn coset_partition(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    if !c.finite {
        return Ok(vec![]);
    }
    let defects = structure_defects(&c.space)?;
    let status = if defects.is_empty() { Status::Pass } else { Status::Fail };
    Ok(vec![Record::new("coset-partition", "classes partition G; N is a subgroup containing K", status)
        .values(defects.len() as f64, None, 0.0)
        .detail(defects.join("; "))])
}

fn coset_representatives(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let v = representative_residual(&c.space, 100, rng);
    Ok(vec![c.judge_abs("coset-representatives", "q(k x h) = q(x), q idempotent", v, c.tol_exact_or(c.cfg.tol.action))])
}

fn coset_action(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let v = action_residual(&c.space, 100, rng)?;
    let mut out = vec![c.judge_abs("coset-action", "e.p = p, n1.(n2.p) = (n1 n2).p", v, c.tol_exact_or(c.cfg.tol.action))];
    if c.finite {
        let bad = action_table_mismatches(&c.space)?;
        out.push(c.judge_abs("coset-action-table", "n.q(x) = q(n x) for all n, x", bad as f64, 0.0));
    }
    Ok(out)
}

fn in_property(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let g = c.space.group();
    let f = match (g.as_finite(), g.law()) {
        (Some(fg), _) => TestFunction::random_table(fg.order(), &(0..fg.order()).collect::<Vec<_>>(), 0.5, 1.5, rng, "f"),
        (None, Some(law)) => {
            let center = c.space.sample_k(rng).coords().unwrap();
            TestFunction::bump(law, law.full_angle(Region::centered(&center, &[0.5; 3], law.dim())), 1.0)?
        }
        _ => unreachable!(),
    };
    let mut ests = Vec::new();
    for n in c.n_elements(c.cfg.samples, rng) {
        ests.push(check_in_property(&c.space, &n, &f, &c.scheme)?);
    }
    Ok(vec![c.judge("in-property", "int_K f(k) dk = int_K f(n k n^-1) dk", &ests)])
}

// ---------------------------------------------------------------- averaging

fn q_linearity(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let (f, g) = (c.random_f(rng)?, c.random_f(rng)?);
    let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let h = f.scale(a).add(&g.scale(b));
    let mut ests = Vec::new();
    for p in c.class_points(c.cfg.samples, rng) {
        let lhs = q_apply(&c.space, &h, &p, &c.scheme)?;
        let rhs = q_apply(&c.space, &f, &p, &c.scheme)?.scale(a) + q_apply(&c.space, &g, &p, &c.scheme)?.scale(b);
        let d = lhs - rhs;
        ests.push(Estimate::new(d.value.abs(), d.error));
    }
    Ok(vec![c.judge("q-linearity", "Q(a f + b g) = a Q(f) + b Q(g)", &ests)])
}

fn q_positivity(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let f = c.random_f(rng)?;
    let mut min = f64::INFINITY;
    let mut ok = true;
    for p in c.class_points(c.cfg.samples, rng) {
        let q = q_apply(&c.space, &f, &p, &c.scheme)?;
        ok &= q.value + q.error >= 0.0;
        min = min.min(q.value);
    }
    let status = if ok { Status::Pass } else { Status::Fail };
    Ok(vec![Record::new("q-positivity", "f >= 0 implies Q(f) >= 0", status).detail(format!("min Q(f) {min:.6e}"))])
}

fn q_representatives(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let f = c.random_f(rng)?;
    let mut ests = Vec::new();
    for p in c.class_points(c.cfg.samples, rng) {
        let reps: Vec<Element> = match c.space.classes() {
            Some(cl) => cl.classes[c.space.class_index(&p).unwrap()].iter().map(|&i| Element::Index(i)).collect(),
            None => (0..3).map(|_| c.space.alternative(&p, rng)).collect(),
        };
        let base = q_apply(&c.space, &f, &p, &c.scheme)?;
        for x in reps {
            let d = q_apply(&c.space, &f, &x, &c.scheme)? - base;
            ests.push(Estimate::new(d.value.abs(), d.error));
        }
    }
    Ok(vec![c.judge("q-representatives", "Q(f)(k x h) = Q(f)(x)", &ests)])
}

fn q_support(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let f = c.random_f(rng)?;
    let image = CosetSupport::image_of(&c.space, f.support())?;
    let outside: Vec<Element> = match (&image, c.space.classes()) {
        (CosetSupport::Classes(s), Some(cl)) => (0..cl.classes.len())
            .filter(|i| s.binary_search(i).is_err())
            .map(|i| Element::Index(cl.representative(i)))
            .collect(),
        (CosetSupport::Interval(lo, hi), None) => (0..c.cfg.samples)
            .map(|i| {
                let d = rng.gen_range(0.01..1.0);
                let t = if i % 2 == 0 { hi + d } else { lo - d };
                c.space.class_rep(t)
            })
            .filter(|p| c.space.group().validate(p).is_ok())
            .filter(|p| c.space.class_param(p).is_some_and(|t| t < *lo || t > *hi))
            .collect(),
        _ => Vec::new(),
    };
    let mut worst: f64 = 0.0;
    for p in &outside {
        worst = worst.max(q_apply(&c.space, &f, p, &c.scheme)?.value.abs());
    }
    Ok(vec![c.judge_abs("q-support", "supp Q(f) within q(supp f)", worst, 0.0).detail(format!("{} classes outside", outside.len()))])
}

fn section_lift_check(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let big_f = c.random_class_fn(rng)?;
    let g = dominating(&c.space, big_f.support())?;
    let lift = section_lift(&c.space, &big_f, &g, &c.scheme)?;
    let pts: Vec<Element> = match big_f.support() {
        CosetSupport::Interval(lo, hi) => (0..c.cfg.samples).map(|_| c.space.class_rep(rng.gen_range(*lo..=*hi))).collect(),
        CosetSupport::Classes(_) => c.class_points(0, rng),
    };
    let mut ests = Vec::new();
    for p in pts {
        let d = q_apply(&c.space, &lift, &p, &c.scheme)? - big_f.evaluate(&c.space, &p)?;
        ests.push(Estimate::new(d.value.abs(), d.error + lift.relative_error() * d.value.abs()));
    }
    Ok(vec![c.judge("section-lift", "Q(f_1) = F", &ests)])
}

fn unit_on_compact_check(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let region = match (c.space.classes(), c.interval) {
        (Some(cl), _) => CosetSupport::Classes((0..cl.classes.len()).collect()),
        (None, Some((lo, hi))) => CosetSupport::Interval(lo, hi),
        _ => unreachable!(),
    };
    let (f, _) = unit_on_compact(&c.space, &region, &c.scheme)?;
    let mut ests = Vec::new();
    for p in c.class_points(c.cfg.samples, rng) {
        let d = q_apply(&c.space, &f, &p, &c.scheme)? - Estimate::exact(1.0);
        ests.push(Estimate::new(d.value.abs(), d.error + f.relative_error()));
    }
    Ok(vec![c.judge("unit-on-compact", "Q(f) = 1 on a compact set of classes", &ests)])
}

fn intertwining(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let f = c.random_f(rng)?;
    let classes = c.class_points(c.cfg.samples, rng);
    let mut ests = Vec::new();
    for n in c.n_elements(c.cfg.samples, rng) {
        ests.push(check_intertwining(&c.space, &n, &f, &classes, &c.scheme)?);
    }
    Ok(vec![c.judge("intertwining", "Q(L_n f) = L_n Q(f)", &ests)])
}

fn fubini(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    if c.space.k().curve().is_none() || c.space.h().curve().is_none() {
        return Ok(vec![]);
    }
    let f = c.random_f(rng)?;
    let mut ests = Vec::new();
    for p in c.class_points(c.cfg.samples.min(5), rng) {
        ests.push(fubini_residual(&c.space, &f, &p, &c.scheme)?);
    }
    Ok(vec![c.judge("fubini", "iterated K x H integrals commute", &ests)])
}

// ---------------------------------------------------------------- rho

/// `(k, x, h)` triples: exhaustive on finite spaces, random near the region otherwise.
fn triples(c: &Ctx, count: usize, in_n: bool, rng: &mut ChaCha8Rng) -> Vec<(Element, Element, Element)> {
    let s = &c.space;
    let g = s.group();
    match (s.k().elements(g), s.h().elements(g), g.elements()) {
        (Some(ks), Some(hs), Some(xs)) => {
            let mut out = Vec::new();
            for k in &ks {
                for x in xs.iter().filter(|x| !in_n || s.in_normalizer(x)) {
                    for h in &hs {
                        out.push((*k, *x, *h));
                    }
                }
            }
            out
        }
        _ => (0..count)
            .map(|_| {
                let p = c.class_points(1, rng).pop().unwrap();
                (s.sample_k(rng), s.alternative(&p, rng), s.sample_h(rng))
            })
            .collect(),
    }
}

fn covariance_ests(c: &Ctx, rho: &RhoFunction, trip: &[(Element, Element, Element)]) -> Result<Vec<Estimate>> {
    trip.par_iter().map(|(k, x, h)| check_covariance(&c.space, rho, k, x, h)).collect()
}

fn rho_f_covariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let trip = triples(c, c.charted_samples(20), false, rng);
    let ests = covariance_ests(c, &c.rho_f, &trip)?;
    Ok(vec![c.judge("rho-f-covariance", "rho_f(k x h) = Delta_K(k) Delta_H(h) / Delta_G(h) rho_f(x)", &ests)])
}

fn rho_f_linearity(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let (f, g) = (c.random_f(rng)?, c.random_f(rng)?);
    let (rf, rg, rfg) = (rho_from_f(&c.space, &f, &c.scheme), rho_from_f(&c.space, &g, &c.scheme), rho_from_f(&c.space, &f.add(&g), &c.scheme));
    let mut ests = Vec::new();
    let mut monotone = true;
    for p in c.class_points(c.cfg.samples, rng) {
        let x = c.space.alternative(&p, rng);
        let (a, b, ab) = (rf.evaluate(&x)?, rg.evaluate(&x)?, rfg.evaluate(&x)?);
        let d = ab - (a + b);
        ests.push(Estimate::new(d.value.abs(), d.error));
        monotone &= a.value <= ab.value + ab.error + a.error;
    }
    let status = if monotone { Status::Pass } else { Status::Fail };
    Ok(vec![
        c.judge("rho-f-linearity", "rho_{f+g} = rho_f + rho_g", &ests),
        Record::new("rho-f-monotone", "f <= g implies rho_f <= rho_g", status),
    ])
}

fn cover_records(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let Some(cover) = &c.cover else {
        let why = format!("N = {} is not open", c.space.normalizer().name());
        return Ok(vec![
            Record::new("cover-coverage", "K U_N A H covers the region", Status::Skip).detail(why.clone()),
            Record::new("cover-separation", "no point of A is covered by another", Status::Skip).detail(why),
        ]);
    };
    let sep_ok = cover.separation > -cover.margin;
    let sep = if cover.separation.is_finite() { format!("{:.4}", cover.separation) } else { "none related".into() };
    Ok(vec![
        Record::new("cover-coverage", "K U_N A H covers the region", Status::Pass)
            .detail(format!("|A| = {}, {} points verified", cover.points.len(), cover.verified)),
        Record::new("cover-separation", "no point of A is covered by another", if sep_ok { Status::Pass } else { Status::Fail })
            .detail(format!("min relation depth {sep}, margin {}", cover.margin)),
        Record::new("cover-local-finiteness", "finitely many terms meet each point", Status::Info).detail(format!(
            "at most {} of {} terms nonzero at a grid point",
            c.positivity.max_terms, c.positivity.cover_size
        )),
    ])
}

fn rho_positivity(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let p = &c.positivity;
    let status = if p.min > 0.0 { Status::Pass } else { Status::Fail };
    Ok(vec![Record::new("rho-positivity", "rho > 0 on the region", status)
        .detail(format!("min rho {:.6e} over {} points", p.min, p.points))])
}

fn rho_covariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let trip = triples(c, c.charted_samples(100), false, rng);
    let ests = covariance_ests(c, &c.rho, &trip)?;
    Ok(vec![c.judge("rho-covariance", "rho(k x h) = Delta_K(k) Delta_H(h) / Delta_G(h) rho(x)", &ests)])
}

fn rho_memo(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let pts = c.class_points(c.cfg.samples, rng);
    let e = memo_consistency(&c.rho, &pts, rng)?;
    Ok(vec![c.judge("rho-memo", "class-reduced rho equals direct rho", &[e])])
}

fn translate_rho_check(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let mut ests = Vec::new();
    for n in c.n_elements(c.cfg.samples, rng) {
        let moved = translate_rho(&c.space, &n, &c.rho)?;
        let trip = triples(c, 10, false, rng);
        ests.extend(covariance_ests(c, &moved, &trip)?);
    }
    Ok(vec![c.judge("translate-rho", "L_n rho is a rho-function", &ests)])
}

fn rho_continuity(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let Some(r) = &c.region else { return Ok(vec![]) };
    let m = if r.dim == 3 { 7 } else { 12 };
    let l = lipschitz_estimate(&c.rho, r, m)?;
    Ok(vec![Record::new("rho-continuity", "neighbouring grid values of rho", Status::Info).detail(format!("max slope {l:.4e}"))])
}

// ---------------------------------------------------------------- measure

fn weil(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let mut ests = Vec::new();
    for _ in 0..c.cfg.samples {
        ests.push(weil_residual(&c.mu, &c.random_f(rng)?)?);
    }
    Ok(vec![c.judge("weil", "int Q(f) d mu_rho = int f rho dx", &ests)])
}

fn weil_kernel(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let mut ests = Vec::new();
    for _ in 0..c.cfg.samples.min(5) {
        ests.push(kernel_residual(&c.mu, &c.random_f(rng)?)?);
    }
    Ok(vec![c.judge("weil-kernel", "Q(f) = 0 implies int f rho dx = 0", &ests)])
}

fn pair_lift_independence(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let mut ests = Vec::new();
    let mut positive = true;
    for _ in 0..c.cfg.samples.min(5) {
        let big_f = c.random_class_fn(rng)?;
        let g1 = dominating(&c.space, big_f.support())?;
        let g2 = match (big_f.support(), c.space.geometry()) {
            (CosetSupport::Classes(cl), None) => {
                let classes = c.space.classes().unwrap();
                let members: Vec<usize> = cl.iter().flat_map(|&i| classes.classes[i].iter().copied()).collect();
                TestFunction::random_table(c.space.group().order().unwrap(), &members, 0.2, 3.0, rng, "g2")
            }
            (CosetSupport::Interval(lo, hi), Some(geom)) => {
                TestFunction::bump(geom.law(), geom.cover_box(*lo, *hi, 0.4 * (hi - lo).max(1.0)), 2.0)?
            }
            _ => unreachable!(),
        };
        ests.push(lift_independence(&c.mu, &big_f, &g1, &g2)?);
        let v = c.mu.pair_with(&big_f, &g1)?;
        positive &= v.value + v.error >= 0.0;
    }
    Ok(vec![
        c.judge("pair-lift-independence", "pairing independent of the section lift", &ests),
        Record::new("pair-positivity", "F >= 0 implies pair(F) >= 0", if positive { Status::Pass } else { Status::Fail }),
    ])
}

fn class_weights(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    if !c.finite {
        return Ok(vec![]);
    }
    let w = c.mu.class_weights()?;
    let oracle = class_weight_oracle(&c.space, &c.rho)?;
    let worst = w.iter().zip(&oracle).map(|(a, b)| (a.value - b).abs()).fold(0.0, f64::max);
    Ok(vec![c
        .judge_abs("class-weights", "mu(c) = rho(c) |c| / (|K| |H|)", worst, c.cfg.tol.exact)
        .detail(format!("weights {:?}", oracle.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>()))])
}

fn lift_property(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let lifted = c.mu.lift();
    let g = c.space.group();
    let mut ests = Vec::new();
    match (c.space.k().elements(g), c.space.h().elements(g)) {
        (Some(ks), Some(hs)) if c.finite => {
            let f = c.random_f(rng)?;
            for k in &ks {
                for h in &hs {
                    ests.push(check_lift_property(&lifted, k, h, &f)?);
                }
            }
        }
        _ => {
            for _ in 0..c.cfg.samples {
                let f = c.random_f(rng)?;
                let (k, h) = (c.space.sample_k(rng), c.space.sample_h(rng));
                ests.push(check_lift_property(&lifted, &k, &h, &f)?);
            }
        }
    }
    Ok(vec![c.judge("lift-property", "int f(k x h^-1) d mu~ = Delta_K(k) Delta_H(h) int f d mu~", &ests)])
}

fn need_lambda(c: &Ctx, name: &str, law: &str) -> std::result::Result<Cocycle, Vec<Record>> {
    c.lambda.clone().ok_or_else(|| {
        vec![Record::new(name, law, Status::Skip).detail(format!("K = {} is not IN", c.space.k().name()))]
    })
}

fn lambda_identity(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "lambda(e, p) = 1";
    let lam = match need_lambda(c, "lambda-identity", law) {
        Ok(l) => l,
        Err(r) => return Ok(r),
    };
    let e = c.space.group().identity();
    let mut worst: f64 = 0.0;
    for p in c.class_points(c.cfg.samples, rng) {
        worst = worst.max((lam.evaluate(&e, &p)?.value - 1.0).abs());
    }
    Ok(vec![c.judge_abs("lambda-identity", law, worst, c.tol_exact_or(c.cfg.tol.cocycle))])
}

fn lambda_well_defined(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "lambda independent of the class representative";
    let lam = match need_lambda(c, "lambda-well-defined", law) {
        Ok(l) => l,
        Err(r) => return Ok(r),
    };
    let mut worst = Estimate::exact(0.0);
    let ns = c.n_elements(c.cfg.samples, rng);
    for (i, p) in c.class_points(c.cfg.samples, rng).iter().enumerate() {
        let n = if c.finite {
            ns[i % ns.len()]
        } else {
            let t = c.space.class_param(p).unwrap();
            c.n_keeping(t, t, rng)?
        };
        let w = lam.well_definedness(&n, p, 10, rng)?;
        if w.value >= worst.value {
            worst = w;
        }
    }
    let mut rec = c.judge_abs("lambda-well-defined", law, worst.value, c.tol_exact_or(c.cfg.tol.cocycle));
    rec.error = (!c.finite).then_some(worst.error);
    Ok(vec![rec])
}

fn lambda_oracle(c: &Ctx, _: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    if !c.finite {
        return Ok(vec![]);
    }
    let lam = match need_lambda(c, "lambda-oracle", "lambda(n, c) = mu(n.c) / mu(c)") {
        Ok(l) => l,
        Err(r) => return Ok(r),
    };
    let w = class_weight_oracle(&c.space, &c.rho)?;
    let classes = c.space.classes().unwrap();
    let mut worst: f64 = 0.0;
    for &n in c.space.normalizer().members().unwrap() {
        let n = Element::Index(n);
        for (i, _) in classes.classes.iter().enumerate() {
            let p = Element::Index(classes.representative(i));
            let j = c.space.class_index(&c.space.n_action(&n, &p)?).unwrap();
            worst = worst.max((lam.evaluate(&n, &p)?.value - w[j] / w[i]).abs());
        }
    }
    Ok(vec![c.judge_abs("lambda-oracle", "lambda(n, c) = mu(n.c) / mu(c)", worst, c.cfg.tol.exact)])
}

fn lambda_invariant(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let Ok(one) = RhoFunction::constant(&c.space, 1.0) else {
        return Ok(vec![]);
    };
    let lam = lambda_from_rho(&c.space, &one)?;
    let mut worst: f64 = 0.0;
    let ns = c.n_elements(c.cfg.samples, rng);
    for p in c.class_points(c.cfg.samples, rng) {
        for n in &ns {
            worst = worst.max((lam.evaluate(n, &p)?.value - 1.0).abs());
        }
    }
    Ok(vec![c.judge_abs("lambda-invariant", "invariant rho gives lambda = 1", worst, c.cfg.tol.exact)])
}

fn quasi_invariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "pair(L_n F) = pair(F lambda(n, .))";
    let lam = match need_lambda(c, "quasi-invariance", law) {
        Ok(l) => l,
        Err(r) => return Ok(r),
    };
    let mut ests = Vec::new();
    if let Some(cl) = c.space.classes() {
        let basis: Vec<CosetFunction> =
            (0..cl.classes.len()).map(|i| CosetFunction::indicator(&c.space, i)).collect::<Result<_>>()?;
        for n in c.n_elements(0, rng) {
            for f in &basis {
                ests.push(check_quasi_invariance(&c.mu, &lam, &n, f)?);
            }
        }
    } else {
        for _ in 0..c.cfg.samples {
            let f = c.random_class_fn(rng)?;
            let CosetSupport::Interval(lo, hi) = *f.support() else { unreachable!() };
            let n = c.n_keeping(lo, hi, rng)?;
            ests.push(check_quasi_invariance(&c.mu, &lam, &n, &f)?);
        }
    }
    Ok(vec![c.judge("quasi-invariance", law, &ests)])
}

fn cocycle(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "lambda(n1 n2, p) = lambda(n1, n2.p) lambda(n2, p)";
    let lam = match need_lambda(c, "cocycle", law) {
        Ok(l) => l,
        Err(r) => return Ok(r),
    };
    let g = c.space.group();
    let mut worst = Estimate::exact(0.0);
    let mut count = 0;
    if c.finite {
        let ns = c.n_elements(0, rng);
        for p in c.class_points(0, rng) {
            for a in &ns {
                for b in &ns {
                    let r = check_cocycle(&lam, a, b, &p)?;
                    worst.value = worst.value.max(r.value);
                    count += 1;
                }
            }
        }
    } else {
        let mut triples = Vec::new();
        while triples.len() < 100 {
            let p = c.class_points(1, rng).pop().unwrap();
            let t = c.space.class_param(&p).unwrap();
            let n2 = c.n_keeping(t, t, rng)?;
            let t2 = c.space.class_param(&c.space.n_action(&n2, &p)?).unwrap();
            let n1 = c.n_keeping(t2, t2, rng)?;
            if c.in_interval(&c.space.n_action(&g.op(&n1, &n2), &p)?) {
                triples.push((n1, n2, p));
            }
        }
        let rs: Vec<Estimate> = triples.par_iter().map(|(a, b, p)| check_cocycle(&lam, a, b, p)).collect::<Result<_>>()?;
        for r in rs {
            if r.value >= worst.value {
                worst = r;
            }
            count += 1;
        }
    }
    let mut rec = c.judge_abs("cocycle", law, worst.value, c.tol_exact_or(c.cfg.tol.cocycle));
    rec.error = (!c.finite).then_some(worst.error);
    Ok(vec![rec.detail(format!("{count} triples"))])
}

fn roundtrip(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "rho -> mu -> lambda -> rho' gives rho' / rho constant on N";
    let (rho2, coef) = match &c.roundtrip {
        Ok(v) => v.clone(),
        Err(Error::Precondition(m)) => {
            return Ok(vec![
                Record::new("roundtrip", law, Status::Skip).detail(m.clone()),
                Record::new("roundtrip-covariance", "rho' is a rho-function", Status::Skip).detail(m.clone()),
            ])
        }
        Err(e) => return Err(e.clone()),
    };
    let pts: Vec<Element> = match c.space.normalizer().members() {
        Some(m) => m.iter().map(|&i| Element::Index(i)).collect(),
        None => positivity_grid(&c.space, c.region.as_ref()),
    };
    let spread = ratio_spread(&rho2, &c.rho, &pts)?;
    let mut rec = c.judge_abs("roundtrip", law, spread.value, c.tol_exact_or(c.cfg.tol.roundtrip));
    rec.error = (!c.finite).then_some(spread.error);
    let rec = rec.detail(format!("c = {coef:.9e}, {} points", pts.len()));
    let trip = triples(c, c.charted_samples(20), true, rng);
    let ests = covariance_ests(c, &rho2, &trip)?;
    Ok(vec![rec, c.judge("roundtrip-covariance", "rho' is a rho-function on N", &ests)])
}

fn equivalence(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "pair_1(F) = pair_2(F phi), phi = rho_1 / rho_2";
    // Pair 1: the covering-sum rho against rho_g for an independent positive g.
    let g = match (c.space.group().order(), c.interval) {
        (Some(n), _) => TestFunction::random_table(n, &(0..n).collect::<Vec<_>>(), 0.5, 1.5, rng, "g"),
        (None, Some((lo, hi))) => dominating(&c.space, &CosetSupport::Interval(lo, hi))?,
        _ => unreachable!(),
    };
    let rho2 = rho_from_f(&c.space, &g, &c.scheme);
    let mu2 = MeasureFunctional::new(&c.space, &rho2, &c.scheme)?;
    let phi = equivalence_density(&c.space, &c.rho, &rho2);
    let basis = support_basis(&c.space, c.interval, c.cfg.samples.min(5), rng)?;
    let mut ests = Vec::new();
    for f in &basis {
        ests.push(check_equivalence(&c.mu, &mu2, &phi, f)?);
    }
    let mut out = vec![c.judge("equivalence", law, &ests)];
    if !c.finite {
        return Ok(out);
    }
    let mut pairs = vec![("covering-sum vs rho_g", c.mu.clone(), mu2, phi)];
    // Pair 2: the round-trip rho' (zero off N) against rho_f with f supported on N.
    if let Ok((rt, _)) = &c.roundtrip {
        let n = c.space.group().order().unwrap();
        let f_n = TestFunction::random_table(n, c.space.normalizer().members().unwrap(), 0.5, 1.5, rng, "f_N");
        let rho_n = rho_from_f(&c.space, &f_n, &c.scheme);
        let mu_rt = MeasureFunctional::new(&c.space, rt, &c.scheme)?;
        let mu_n = MeasureFunctional::new(&c.space, &rho_n, &c.scheme)?;
        pairs.push(("round-trip vs rho_{f_N}", mu_rt, mu_n, equivalence_density(&c.space, rt, &rho_n)));
    }
    let mut density_worst: f64 = 0.0;
    let mut null_ok = true;
    let mut details = Vec::new();
    for (label, m1, m2, phi) in &pairs {
        let (w1, w2) = (m1.class_weights()?, m2.class_weights()?);
        let (n1, n2) = (m1.null_classes()?, m2.null_classes()?);
        null_ok &= n1 == n2;
        details.push(format!("{label}: null {n1:?} vs {n2:?}"));
        for (i, (a, b)) in w1.iter().zip(&w2).enumerate() {
            let rep = Element::Index(c.space.classes().unwrap().representative(i));
            let v = phi.evaluate(&c.space, &rep)?.value;
            if b.value > 0.0 {
                density_worst = density_worst.max((a.value / b.value - v).abs());
            }
        }
        density_worst = density_worst.max(phi_classwise(&c.space, m1.rho(), m2.rho(), phi)?);
    }
    out.push(c.judge_abs("equivalence-density", "d mu_1 / d mu_2 = rho_1 / rho_2 classwise", density_worst, c.cfg.tol.exact));
    out.push(
        Record::new("equivalence-null-sets", "equivalent measures share null classes", if null_ok { Status::Pass } else { Status::Fail })
            .detail(details.join("; ")),
    );
    Ok(out)
}

fn support(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let basis = support_basis(&c.space, c.interval, 20, rng)?;
    let rep = check_support(&c.mu, &basis)?;
    let status = if rep.passed() { Status::Pass } else { Status::Fail };
    Ok(vec![Record::new("support", "supp mu = K\\G/H", status)
        .detail(format!("{} functions, min pairing {:.6e} {}", rep.tested, rep.min, rep.failures.join("; ")))])
}

fn support_counterexample(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let basis = support_basis(&c.space, c.interval, 5, rng)?;
    let zeroed = match (c.space.classes(), basis[0].support()) {
        (Some(cl), _) => {
            let (s, target) = (c.space.clone(), cl.classes.len() - 1);
            c.rho.zeroed_on("zeroed class", move |p| s.class_index(p) == Some(target))
        }
        (None, CosetSupport::Interval(lo, hi)) => {
            let (s, lo, hi) = (c.space.clone(), *lo, *hi);
            c.rho.zeroed_on("zeroed classes", move |p| s.class_param(p).is_some_and(|t| lo <= t && t <= hi))
        }
        _ => unreachable!(),
    };
    let mu = MeasureFunctional::new(&c.space, &zeroed, &c.scheme)?;
    let rep = check_support(&mu, &basis)?;
    let status = if rep.passed() { Status::Fail } else { Status::Pass };
    Ok(vec![Record::new("support-counterexample", "zeroed rho makes the support check fail", status)
        .detail(format!("{} of {} pairings not positive", rep.failures.len(), rep.tested))])
}

fn two_sided_translate(c: &Ctx, rng: &mut ChaCha8Rng) -> Result<Vec<Record>> {
    let law = "int f(n x h^-1) d mu~ = Delta_H(h) int f lambda(n^-1, q(x)) d mu~";
    let literal_law = "printed form with lambda(n, q(x))";
    let lam = match need_lambda(c, "two-sided-translate", law) {
        Ok(l) => l,
        Err(r) => return Ok(r),
    };
    let lifted = c.mu.lift();
    let g = c.space.group();
    let (mut good, mut literal) = (Vec::new(), Vec::new());
    if c.finite {
        let f = c.random_f(rng)?;
        for n in c.n_elements(0, rng) {
            for h in c.space.h().elements(g).unwrap() {
                let (a, b) = check_two_sided_translate(&lifted, &lam, &n, &h, &f)?;
                good.push(a);
                literal.push(b);
            }
        }
    } else {
        for _ in 0..c.cfg.samples {
            let f = c.random_f(rng)?;
            let CosetSupport::Interval(lo, hi) = CosetSupport::image_of(&c.space, f.support())? else { unreachable!() };
            // f(n x h^-1) lives on n^-1 . supp, which must stay in the region.
            let n = g.inverse(&c.n_keeping(lo, hi, rng)?);
            let h = c.space.sample_h(rng);
            let (a, b) = check_two_sided_translate(&lifted, &lam, &n, &h, &f)?;
            good.push(a);
            literal.push(b);
        }
    }
    let worst_literal = literal.iter().map(|e| e.value).fold(0.0, f64::max);
    Ok(vec![
        c.judge("two-sided-translate", law, &good),
        Record::new("two-sided-translate-literal", literal_law, Status::Info)
            .values(worst_literal, None, 0.0)
            .detail("not gating; differs when lambda(n, .) != lambda(n^-1, .)"),
    ])
}
