//! Integration schemes and the box integrators behind every Haar integral.
//!
//! Tensor quadrature is a nested trapezoid rule evaluated at `n`, `n/2` and
//! `n/4` subintervals per axis on one node set, plus the midpoint rule on the
//! half-shifted grid. The reported error is the larger of the Richardson
//! difference `|T_n - T_{n/2}|` (doubled while the levels are not yet
//! contracting) and `|T_n - M_n|`, plus a rounding term.
//!
//! Trapezoid errors of compactly supported bumps are Fourier aliases that
//! oscillate in the step size: when the `n/2` level lands near a zero of the
//! transform, `T_{n/2}` and `T_n` agree while `T_n` is still off. The shifted
//! rule flips the sign of the leading alias and exposes exactly that case;
//! the dyadic difference covers the converse. Geometric tail extrapolation is
//! deliberately not used.

use std::ops::{Add, Mul, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationScheme {
    /// Counting measure on a finite group; reported error is zero.
    ExactSum,
    /// Nested trapezoid rule with `points` subintervals per axis (even, >= 4).
    Tensor { points: usize },
    /// Uniform sampling of the integration box. `stream` selects an
    /// independent substream of the seeded generator.
    MonteCarlo { samples: usize, seed: u64, stream: u64 },
}

impl IntegrationScheme {
    pub fn tensor(points: usize) -> Self {
        IntegrationScheme::Tensor { points }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        IntegrationScheme::MonteCarlo { samples, seed, stream: 0 }
    }

    /// Same scheme on another substream (no effect on deterministic rules).
    pub fn with_stream(self, stream: u64) -> Self {
        match self {
            IntegrationScheme::MonteCarlo { samples, seed, .. } => {
                IntegrationScheme::MonteCarlo { samples, seed, stream }
            }
            other => other,
        }
    }

    /// Same rule at twice the resolution.
    pub fn doubled(self) -> Self {
        match self {
            IntegrationScheme::Tensor { points } => IntegrationScheme::Tensor { points: 2 * points },
            IntegrationScheme::MonteCarlo { samples, seed, stream } => {
                IntegrationScheme::MonteCarlo { samples: 4 * samples, seed, stream }
            }
            IntegrationScheme::ExactSum => IntegrationScheme::ExactSum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            IntegrationScheme::Tensor { points } if points < 4 || points % 2 != 0 => Err(
                Error::Config(format!("tensor quadrature needs an even resolution >= 4, got {points}")),
            ),
            IntegrationScheme::MonteCarlo { samples, .. } if samples < 2 => {
                Err(Error::Config("monte carlo needs at least 2 samples".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            IntegrationScheme::ExactSum => "exact-sum".into(),
            IntegrationScheme::Tensor { points } => format!("tensor({points})"),
            IntegrationScheme::MonteCarlo { samples, seed, stream } => {
                format!("monte-carlo({samples}, seed {seed}, stream {stream})")
            }
        }
    }
}

/// A value with a nonnegative error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    /// Quotient with first-order error propagation.
    pub fn div(self, rhs: Estimate) -> Estimate {
        let value = self.value / rhs.value;
        let error = if value == 0.0 && self.error == 0.0 && rhs.error == 0.0 {
            0.0
        } else {
            (self.error + value.abs() * rhs.error) / rhs.value.abs()
        };
        Estimate { value, error }
    }

    pub fn scale(self, c: f64) -> Estimate {
        Estimate { value: c * self.value, error: c.abs() * self.error }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value - rhs.value, error: self.error + rhs.error }
    }
}

impl Mul for Estimate {
    type Output = Estimate;
    fn mul(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value * rhs.value,
            error: self.error * rhs.value.abs() + rhs.error * self.value.abs() + self.error * rhs.error,
        }
    }
}

/// One coordinate interval of an integration box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Integrand has period `hi - lo` along this axis.
    pub periodic: bool,
    /// Arc of a periodic axis: nodes are wrapped into this base period.
    wrap: Option<(f64, f64)>,
}

impl Axis {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: false, wrap: None }
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: true, wrap: None }
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

const PARALLEL_THRESHOLD: usize = 20_000;

/// Integrate `f` over the box spanned by `axes` (Lebesgue measure on the box).
pub fn integrate_box<F>(axes: &[Axis], scheme: &IntegrationScheme, f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    scheme.validate()?;
    if axes.is_empty() {
        return Ok(Estimate::exact(f(&[])?));
    }
    if axes.iter().any(|a| !(a.width() >= 0.0) || !a.lo.is_finite() || !a.hi.is_finite()) {
        return Err(Error::IntegrationDomain(format!("degenerate box {axes:?}")));
    }
    if axes.iter().any(|a| a.width() == 0.0) {
        return Ok(Estimate::exact(0.0));
    }
    match *scheme {
        IntegrationScheme::ExactSum => Err(Error::Config(
            "exact-sum applies to finite groups only; choose tensor or monte-carlo".into(),
        )),
        IntegrationScheme::Tensor { points } => {
            let trimmed = trim_to_support(axes, points, &f)?;
            nested_trapezoid(&trimmed, points, &f)
        }
        IntegrationScheme::MonteCarlo { samples, seed, stream } => {
            monte_carlo(axes, samples, seed, stream, &f)
        }
    }
}

/// Grid node `j` of `m` subintervals along `axis`.
#[inline]
fn node(axis: &Axis, m: usize, j: usize) -> f64 {
    node_at(axis, m, j as f64)
}

/// Point at fractional node position `pos` (wrapped into the base period).
#[inline]
fn node_at(axis: &Axis, m: usize, pos: f64) -> f64 {
    let x = axis.lo + axis.width() * pos / m as f64;
    match axis.wrap {
        Some((lo, hi)) if x < lo || x >= hi => lo + (x - lo).rem_euclid(hi - lo),
        _ => x,
    }
}

fn node_count(axis: &Axis, m: usize) -> usize {
    if axis.periodic {
        m
    } else {
        m + 1
    }
}

/// Shrink non-periodic axes to the bounding box of the integrand's nonzero
/// scan nodes, widened by two scan cells. Periodic axes whose scan leaves a
/// zero run of at least four nodes shrink to the complementary arc, likewise
/// widened. Fails if the integrand is nonzero on the boundary of the original
/// box.
fn trim_to_support<F>(axes: &[Axis], points: usize, f: &F) -> Result<Vec<Axis>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let m = (points / 4).max(8);
    let dims: Vec<usize> = axes.iter().map(|a| node_count(a, m)).collect();
    let total: usize = dims.iter().product();
    let mut first = vec![usize::MAX; axes.len()];
    let mut last = vec![0usize; axes.len()];
    let mut hit: Vec<Vec<bool>> = dims.iter().map(|&n| vec![false; n]).collect();
    let mut idx = vec![0usize; axes.len()];
    let mut x = vec![0.0; axes.len()];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..axes.len()).rev() {
            idx[d] = rem % dims[d];
            rem /= dims[d];
            x[d] = node(&axes[d], m, idx[d]);
        }
        let v = f(&x)?;
        if v != 0.0 {
            let on_boundary =
                (0..axes.len()).any(|d| !axes[d].periodic && (idx[d] == 0 || idx[d] == m));
            if on_boundary {
                return Err(Error::IntegrationDomain(format!(
                    "integrand is {v:e} at boundary point {x:?} of the quadrature box"
                )));
            }
            for d in 0..axes.len() {
                first[d] = first[d].min(idx[d]);
                last[d] = last[d].max(idx[d]);
                hit[d][idx[d]] = true;
            }
        }
    }
    if first[0] == usize::MAX {
        return Ok(axes.to_vec());
    }
    Ok(axes
        .iter()
        .enumerate()
        .map(|(d, a)| {
            if a.periodic {
                periodic_arc(a, m, &hit[d])
            } else {
                let lo = first[d].saturating_sub(2);
                let hi = (last[d] + 2).min(m);
                Axis::new(node(a, m, lo), node(a, m, hi))
            }
        })
        .collect())
}

/// Support arc of a periodic axis from its scan occupancy, or the axis itself.
fn periodic_arc(a: &Axis, m: usize, hit: &[bool]) -> Axis {
    // Longest circular run of empty scan nodes.
    let (mut best, mut best_end) = (0usize, 0usize);
    let mut run = 0usize;
    for j in 0..2 * m {
        if hit[j % m] {
            run = 0;
        } else {
            run += 1;
            if run > best {
                (best, best_end) = (run.min(m), j);
            }
        }
    }
    if best < 4 || best >= m {
        return *a;
    }
    let cell = a.width() / m as f64;
    // Nonzero arc starts right after the run; keep two empty cells each side.
    let start = (best_end + 1) as f64 - 2.0;
    let cells = (m - best) as f64 - 1.0 + 4.0;
    let lo = a.lo + start * cell;
    Axis { lo, hi: lo + cells * cell, periodic: false, wrap: Some((a.lo, a.hi)) }
}

fn nested_trapezoid<F>(axes: &[Axis], n: usize, f: &F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let dims: Vec<usize> = axes.iter().map(|a| node_count(a, n)).collect();
    let total: usize = dims.iter().product();
    let step: Vec<f64> = axes.iter().map(|a| a.width() / n as f64).collect();

    // Weights of the n, n/2 and n/4 rules per axis (nested on the same nodes).
    let quarter = n % 4 == 0;
    let weights = |d: usize, j: usize| -> [f64; 3] {
        let h = step[d];
        let a = &axes[d];
        let level = |s: usize| -> f64 {
            if j % s != 0 || (s == 4 && !quarter) {
                0.0
            } else if !a.periodic && (j == 0 || j == n) {
                0.5 * s as f64 * h
            } else {
                s as f64 * h
            }
        };
        [level(1), level(2), level(4)]
    };

    let slice = |i0: usize| -> Result<[f64; 4]> {
        let inner: usize = dims[1..].iter().product();
        let mut idx = vec![0usize; axes.len()];
        let mut x = vec![0.0; axes.len()];
        idx[0] = i0;
        x[0] = node(&axes[0], n, i0);
        let w0 = weights(0, i0);
        let mut acc = [0.0; 4];
        for flat in 0..inner {
            let mut rem = flat;
            let mut w = w0;
            for d in (1..axes.len()).rev() {
                idx[d] = rem % dims[d];
                rem /= dims[d];
                x[d] = node(&axes[d], n, idx[d]);
                let wd = weights(d, idx[d]);
                for l in 0..3 {
                    w[l] *= wd[l];
                }
            }
            let v = f(&x)?;
            for l in 0..3 {
                acc[l] += w[l] * v;
            }
            acc[3] += w[0] * v.abs();
        }
        Ok(acc)
    };

    let parts: Vec<[f64; 4]> = if total >= PARALLEL_THRESHOLD {
        (0..dims[0]).into_par_iter().map(slice).collect::<Result<_>>()?
    } else {
        (0..dims[0]).map(slice).collect::<Result<_>>()?
    };
    let [fine, coarse, coarsest, abs] = parts.iter().fold([0.0; 4], |mut acc, p| {
        for l in 0..4 {
            acc[l] += p[l];
        }
        acc
    });
    let rounding = f64::EPSILON * abs * (total as f64).log2().max(1.0);
    let d2 = (fine - coarse).abs();
    let d1 = (coarse - coarsest).abs();
    let shifted = (fine - midpoint(axes, n, f)?).abs();
    Ok(Estimate { value: fine, error: richardson_remainder(d1, d2, quarter).max(shifted) + rounding })
}

/// Midpoint rule with `n` cells per axis: the trapezoid nodes shifted by half
/// a step. Its leading alias error has the opposite sign of the trapezoid's,
/// so the two disagree wherever the trapezoid rule is off at its own level.
fn midpoint<F>(axes: &[Axis], n: usize, f: &F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let total = n.pow(axes.len() as u32);
    let cell: f64 = axes.iter().map(|a| a.width() / n as f64).product();
    let slice = |i0: usize| -> Result<f64> {
        let inner = total / n;
        let mut x = vec![0.0; axes.len()];
        x[0] = node_at(&axes[0], n, i0 as f64 + 0.5);
        let mut acc = 0.0;
        for flat in 0..inner {
            let mut rem = flat;
            for d in (1..axes.len()).rev() {
                x[d] = node_at(&axes[d], n, (rem % n) as f64 + 0.5);
                rem /= n;
            }
            acc += f(&x)?;
        }
        Ok(acc)
    };
    let parts: Vec<f64> = if total >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(slice).collect::<Result<_>>()?
    } else {
        (0..n).map(slice).collect::<Result<_>>()?
    };
    Ok(cell * parts.iter().sum::<f64>())
}

/// Error of the finest rule from the level differences `d1` (n/4 to n/2)
/// and `d2` (n/2 to n). `d2` is reported as is: no extrapolation factor, since
/// an accidentally accurate `n/2` level makes any assumed contraction
/// unsafe. While the rule has not started contracting (`d2 > d1 / 2`) the
/// estimate is doubled.
fn richardson_remainder(d1: f64, d2: f64, have_d1: bool) -> f64 {
    if have_d1 && d2 > 0.5 * d1 {
        2.0 * d2
    } else {
        d2
    }
}

fn monte_carlo<F>(axes: &[Axis], samples: usize, seed: u64, stream: u64, f: &F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let volume: f64 = axes.iter().map(Axis::width).product();
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| axes.iter().map(|a| rng.gen_range(a.lo..a.hi)).collect())
        .collect();
    let values: Vec<f64> = points.par_iter().map(|x| f(x)).collect::<Result<_>>()?;
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // Three standard errors.
    Ok(Estimate { value: volume * mean, error: 3.0 * volume * (var / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump(t: f64) -> f64 {
        if t.abs() < 1.0 {
            (-4.0 / (1.0 - t * t)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn polynomial_on_periodic_axis_is_exact() {
        let axes = [Axis::periodic(-PI, PI)];
        let est = integrate_box(&axes, &IntegrationScheme::tensor(16), |x| Ok(x[0].cos().powi(2)))
            .unwrap();
        assert!((est.value - PI).abs() < 1e-14);
        assert!(est.error < 1e-13);
    }

    #[test]
    fn bump_converges_and_estimate_bounds_error() {
        // Reference by a much finer rule.
        let axes = [Axis::new(-3.0, 3.0)];
        let reference =
            integrate_box(&axes, &IntegrationScheme::tensor(1024), |x| Ok(bump(x[0]))).unwrap();
        let est = integrate_box(&axes, &IntegrationScheme::tensor(64), |x| Ok(bump(x[0]))).unwrap();
        assert!((est.value - reference.value).abs() <= est.error);
        assert!(est.error < 1e-8);
    }

    #[test]
    fn boundary_mass_is_a_domain_error() {
        let axes = [Axis::new(0.0, 1.0)];
        let err = integrate_box(&axes, &IntegrationScheme::tensor(16), |_| Ok(1.0)).unwrap_err();
        assert!(matches!(err, Error::IntegrationDomain(_)));
    }

    #[test]
    fn exact_sum_on_a_box_is_a_config_error() {
        let axes = [Axis::new(0.0, 1.0)];
        assert!(matches!(
            integrate_box(&axes, &IntegrationScheme::ExactSum, |_| Ok(0.0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn monte_carlo_is_reproducible_and_streams_differ() {
        let axes = [Axis::new(-1.0, 1.0), Axis::new(-1.0, 1.0)];
        let f = |x: &[f64]| Ok(bump(x[0]) * bump(x[1]));
        let s = IntegrationScheme::monte_carlo(4000, 42);
        let a = integrate_box(&axes, &s, f).unwrap();
        let b = integrate_box(&axes, &s, f).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = integrate_box(&axes, &s.with_stream(1), f).unwrap();
        assert_ne!(a.value, c.value);
        let t = integrate_box(&axes, &IntegrationScheme::tensor(64), f).unwrap();
        assert!((a.value - t.value).abs() <= a.error + t.error);
    }

    #[test]
    fn zero_dimensional_box_is_point_evaluation() {
        let est = integrate_box(&[], &IntegrationScheme::tensor(8), |_| Ok(2.5)).unwrap();
        assert_eq!(est, Estimate::exact(2.5));
    }

    #[test]
    fn odd_resolution_rejected() {
        assert!(IntegrationScheme::tensor(7).validate().is_err());
    }
}
