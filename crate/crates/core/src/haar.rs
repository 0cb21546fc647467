//! Haar integrals over a whole group and the certificates built on them.

use rand::Rng;

use crate::error::{Error, Result};
use crate::function::{Support, TestFunction};
use crate::group::{Element, Group};
use crate::integrate::{integrate_box, Axis, Estimate, IntegrationScheme};

/// Integration axes for a chart box.
pub(crate) fn chart_axes(group: &Group, support: &Support) -> Result<Vec<Axis>> {
    let law = group.law().ok_or_else(|| Error::Unsupported("chart axes on a finite group".into()))?;
    let r = support
        .region()
        .ok_or_else(|| Error::IntegrationDomain("charted integrand without a support box".into()))?;
    Ok((0..law.dim())
        .map(|i| {
            if Some(i) == law.periodic_axis() {
                Axis::periodic(-std::f64::consts::PI, std::f64::consts::PI)
            } else {
                Axis::new(r.lo[i], r.hi[i])
            }
        })
        .collect())
}

/// Lift a coordinate slice back to an element.
#[inline]
pub(crate) fn coords_element(x: &[f64]) -> Element {
    let mut c = [0.0; 3];
    c[..x.len()].copy_from_slice(x);
    Element::Coords(c)
}

fn check_scheme(group: &Group, scheme: &IntegrationScheme) -> Result<()> {
    match (group.is_finite(), scheme) {
        (true, IntegrationScheme::ExactSum) | (false, IntegrationScheme::Tensor { .. })
        | (false, IntegrationScheme::MonteCarlo { .. }) => scheme.validate(),
        (true, s) => Err(Error::Config(format!("{} on finite group {}; use exact-sum", s.describe(), group.name()))),
        (false, _) => Err(Error::Config(format!("exact-sum on charted group {}", group.name()))),
    }
}

/// `int_G f(x) dx` under the group's Haar normalization.
pub fn integrate_haar(group: &Group, f: &TestFunction, scheme: &IntegrationScheme) -> Result<Estimate> {
    check_scheme(group, scheme)?;
    if group.is_finite() {
        let elems = f.support().elements().ok_or_else(|| {
            Error::Precondition(format!("{} has no finite support on {}", f.label(), group.name()))
        })?;
        let mut sum = 0.0;
        for &i in elems {
            sum += f.evaluate(&Element::Index(i))?;
        }
        return Ok(Estimate::exact(sum));
    }
    let axes = chart_axes(group, f.support())?;
    let est = integrate_box(&axes, scheme, |x| {
        let e = coords_element(x);
        let v = f.evaluate(&e)?;
        Ok(if v == 0.0 { 0.0 } else { v * group.haar_density(&e) })
    })?;
    let inner = f.relative_error() * est.value.abs();
    Ok(Estimate::new(est.value, est.error + inner))
}

/// `|int f(x y) dx - Delta_G(y)^-1 int f(x) dx|` with its error bound.
pub fn modular_residual(
    group: &Group,
    f: &TestFunction,
    y: &Element,
    scheme: &IntegrationScheme,
) -> Result<Estimate> {
    let shifted = integrate_haar(group, &f.right_translate(group, y)?, scheme)?;
    let plain = integrate_haar(group, f, &scheme.with_stream(1))?;
    let diff = shifted - plain.scale(1.0 / group.modular(y));
    Ok(Estimate::new(diff.value.abs(), diff.error))
}

/// `|int f(y x) dx - int f(x) dx|` with its error bound.
pub fn left_invariance_residual(
    group: &Group,
    f: &TestFunction,
    y: &Element,
    scheme: &IntegrationScheme,
) -> Result<Estimate> {
    let shifted = integrate_haar(group, &f.two_sided(group, y, &group.identity())?, scheme)?;
    let plain = integrate_haar(group, f, &scheme.with_stream(1))?;
    let diff = shifted - plain;
    Ok(Estimate::new(diff.value.abs(), diff.error))
}

/// Largest coordinate defect of associativity, inverses and identity.
/// Exhaustive on finite groups, `samples` random triples on charted ones.
pub fn axiom_residual<R: Rng + ?Sized>(group: &Group, samples: usize, rng: &mut R) -> f64 {
    let check = |x: &Element, y: &Element, z: &Element| -> f64 {
        let e = group.identity();
        let assoc = group.distance(&group.op(&group.op(x, y), z), &group.op(x, &group.op(y, z)));
        let inv = group.distance(&group.op(x, &group.inverse(x)), &e);
        let ident = group.distance(&group.op(x, &e), x).max(group.distance(&group.op(&e, x), x));
        assoc.max(inv).max(ident)
    };
    match group.elements() {
        Some(all) => {
            let mut worst: f64 = 0.0;
            for x in &all {
                for y in &all {
                    for z in &all {
                        worst = worst.max(check(x, y, z));
                    }
                }
            }
            worst
        }
        None => (0..samples)
            .map(|_| {
                let (x, y, z) = (group.sample(rng), group.sample(rng), group.sample(rng));
                // Scale-aware: associativity is compared relative to the size of the product.
                let scale = [x, y, z]
                    .iter()
                    .flat_map(|e| e.coords().unwrap())
                    .fold(1.0f64, |m, v| m.max(v.abs()));
                check(&x, &y, &z) / (scale * scale)
            })
            .fold(0.0, f64::max),
    }
}

/// Largest `|Delta(xy) - Delta(x) Delta(y)|` plus `|Delta(e) - 1|` (closed form).
pub fn modular_homomorphism_residual<R: Rng + ?Sized>(group: &Group, samples: usize, rng: &mut R) -> f64 {
    let mut worst = (group.modular(&group.identity()) - 1.0).abs();
    let mut pair = |x: &Element, y: &Element| {
        let d = (group.modular(&group.op(x, y)) - group.modular(x) * group.modular(y)).abs();
        worst = worst.max(d);
    };
    match group.elements() {
        Some(all) => {
            for x in &all {
                for y in &all {
                    pair(x, y);
                }
            }
        }
        None => {
            for _ in 0..samples {
                let (x, y) = (group.sample(rng), group.sample(rng));
                pair(&x, &y);
            }
        }
    }
    worst
}

/// Smallest Haar density over random samples (must be positive).
pub fn min_haar_density<R: Rng + ?Sized>(group: &Group, samples: usize, rng: &mut R) -> f64 {
    (0..samples).map(|_| group.haar_density(&group.sample(rng))).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ChartLaw, FiniteGroup, Region};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counting_measure_on_s3() {
        let g = Group::finite("S3", FiniteGroup::symmetric(3));
        let one = TestFunction::table(vec![1.0; 6], "one");
        assert_eq!(integrate_haar(&g, &one, &IntegrationScheme::ExactSum).unwrap(), Estimate::exact(6.0));
        let zero = TestFunction::zero(&g);
        assert_eq!(integrate_haar(&g, &zero, &IntegrationScheme::ExactSum).unwrap().value, 0.0);
    }

    #[test]
    fn scheme_kind_mismatch_is_config_error() {
        let g = Group::charted(ChartLaw::AffineLine);
        let f = TestFunction::bump(ChartLaw::AffineLine, Region::new(&[1.0, 0.0], &[2.0, 1.0]), 1.0).unwrap();
        assert!(matches!(integrate_haar(&g, &f, &IntegrationScheme::ExactSum), Err(Error::Config(_))));
    }

    #[test]
    fn affine_modular_function_certified() {
        let g = Group::charted(ChartLaw::AffineLine);
        let f = TestFunction::bump(ChartLaw::AffineLine, Region::new(&[1.0, 0.0], &[2.0, 1.0]), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let y = g.sample(&mut rng);
            let r = modular_residual(&g, &f, &y, &IntegrationScheme::tensor(128)).unwrap();
            assert!(r.value <= 1e-8, "{r:?}");
            assert!(r.value <= 5.0 * r.error.max(1e-15));
        }
    }

    #[test]
    fn axioms_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in [
            Group::finite("D4", FiniteGroup::dihedral4()),
            Group::charted(ChartLaw::AffineLine),
            Group::charted(ChartLaw::Heisenberg),
            Group::charted(ChartLaw::Se2),
        ] {
            assert!(axiom_residual(&g, 1000, &mut rng) <= 1e-12, "{}", g.name());
            assert!(modular_homomorphism_residual(&g, 1000, &mut rng) <= 1e-12);
        }
    }
}
