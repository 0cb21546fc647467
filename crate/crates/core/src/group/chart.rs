//! Closed-form group laws on global coordinate charts.

use std::f64::consts::PI;

use super::Region;

/// Wrap an angle into `[-pi, pi]`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    theta - 2.0 * PI * (theta / (2.0 * PI)).round()
}

/// The charted groups of the catalog.
///
/// * `AffineLine`: the ax+b group, coordinates `(a, b)` with `a > 0`,
///   law `(a, b)(c, d) = (ac, ad + b)`, left Haar `da db / a^2`.
/// * `Heisenberg`: coordinates `(x, y, z)`, law
///   `(x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y')`, Haar `dx dy dz`.
/// * `Se2`: rigid motions `(theta, t)`, law `(a, s)(b, t) = (a + b, s + R_a t)`,
///   Haar `dtheta dt`. The angle axis is periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartLaw {
    AffineLine,
    Heisenberg,
    Se2,
}

impl ChartLaw {
    pub fn dim(self) -> usize {
        match self {
            ChartLaw::AffineLine => 2,
            ChartLaw::Heisenberg | ChartLaw::Se2 => 3,
        }
    }

    pub fn identity(self) -> [f64; 3] {
        match self {
            ChartLaw::AffineLine => [1.0, 0.0, 0.0],
            _ => [0.0; 3],
        }
    }

    /// Axis whose coordinate is an angle of period `2 pi`.
    pub fn periodic_axis(self) -> Option<usize> {
        match self {
            ChartLaw::Se2 => Some(0),
            _ => None,
        }
    }

    pub fn in_domain(self, x: &[f64; 3]) -> bool {
        let d = self.dim();
        if x[..d].iter().any(|v| !v.is_finite()) || x[d..].iter().any(|&v| v != 0.0) {
            return false;
        }
        match self {
            ChartLaw::AffineLine => x[0] > 0.0,
            ChartLaw::Heisenberg => true,
            ChartLaw::Se2 => x[0].abs() <= PI,
        }
    }

    #[inline]
    pub fn mul(self, x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
        match self {
            ChartLaw::AffineLine => [x[0] * y[0], x[0] * y[1] + x[1], 0.0],
            ChartLaw::Heisenberg => [x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]],
            ChartLaw::Se2 => {
                let (s, c) = x[0].sin_cos();
                [wrap_angle(x[0] + y[0]), x[1] + c * y[1] - s * y[2], x[2] + s * y[1] + c * y[2]]
            }
        }
    }

    #[inline]
    pub fn inv(self, x: &[f64; 3]) -> [f64; 3] {
        match self {
            ChartLaw::AffineLine => [1.0 / x[0], -x[1] / x[0], 0.0],
            ChartLaw::Heisenberg => [-x[0], -x[1], -x[2] + x[0] * x[1]],
            ChartLaw::Se2 => {
                let (s, c) = x[0].sin_cos();
                [wrap_angle(-x[0]), -(c * x[1] + s * x[2]), -(-s * x[1] + c * x[2])]
            }
        }
    }

    /// Density of left Haar measure against Lebesgue measure on the chart.
    #[inline]
    pub fn haar_density(self, x: &[f64; 3]) -> f64 {
        match self {
            ChartLaw::AffineLine => 1.0 / (x[0] * x[0]),
            _ => 1.0,
        }
    }

    /// Modular function, normalized so that `int f(xy) dx = modular(y)^-1 int f(x) dx`.
    #[inline]
    pub fn modular(self, x: &[f64; 3]) -> f64 {
        match self {
            ChartLaw::AffineLine => 1.0 / x[0],
            _ => 1.0,
        }
    }

    /// Box used to draw random elements.
    pub fn sample_box(self) -> Region {
        match self {
            ChartLaw::AffineLine => Region::new(&[0.25, -2.0], &[4.0, 2.0]),
            ChartLaw::Heisenberg => Region::new(&[-2.0; 3], &[2.0; 3]),
            ChartLaw::Se2 => Region::new(&[-PI, -2.0, -2.0], &[PI, 2.0, 2.0]),
        }
    }

    /// Coordinate distance, measuring angles modulo `2 pi`.
    pub fn distance(self, x: &[f64; 3], y: &[f64; 3]) -> f64 {
        (0..self.dim())
            .map(|i| {
                if Some(i) == self.periodic_axis() {
                    wrap_angle(x[i] - y[i]).abs()
                } else {
                    (x[i] - y[i]).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Bounding box of `g * region`.
    pub fn left_translate_region(self, g: &[f64; 3], region: &Region) -> Region {
        match self {
            // Left translation is affine in the remaining coordinates.
            ChartLaw::AffineLine | ChartLaw::Heisenberg => {
                Region::bounding(self.dim(), region.corners().iter().map(|c| self.mul(g, c)))
            }
            ChartLaw::Se2 => {
                let moved = Region::bounding(3, region.corners().iter().map(|c| self.mul(g, c)));
                self.full_angle(moved)
            }
        }
    }

    /// Bounding box of `region * g`.
    pub fn right_translate_region(self, region: &Region, g: &[f64; 3]) -> Region {
        match self {
            ChartLaw::AffineLine | ChartLaw::Heisenberg => {
                Region::bounding(self.dim(), region.corners().iter().map(|c| self.mul(c, g)))
            }
            ChartLaw::Se2 => {
                // (theta, t) g = (theta + phi, t + R_theta s) with |R_theta s| = |s|.
                let r = (g[1] * g[1] + g[2] * g[2]).sqrt();
                let mut out = *region;
                for axis in 1..3 {
                    out.lo[axis] -= r;
                    out.hi[axis] += r;
                }
                self.full_angle(out)
            }
        }
    }

    /// Regions on SE(2) always span the full circle in the angle axis.
    pub fn full_angle(self, mut region: Region) -> Region {
        if let Some(axis) = self.periodic_axis() {
            region.lo[axis] = -PI;
            region.hi[axis] = PI;
        }
        region
    }

    pub fn name(self) -> &'static str {
        match self {
            ChartLaw::AffineLine => "axb",
            ChartLaw::Heisenberg => "heisenberg",
            ChartLaw::Se2 => "se2",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_law_matches_closed_form() {
        let p = ChartLaw::AffineLine.mul(&[2.0, 1.0, 0.0], &[3.0, 4.0, 0.0]);
        assert_eq!(p, [6.0, 9.0, 0.0]);
    }

    #[test]
    fn inverses() {
        for law in [ChartLaw::AffineLine, ChartLaw::Heisenberg, ChartLaw::Se2] {
            let x = match law {
                ChartLaw::AffineLine => [1.7, -0.4, 0.0],
                _ => [0.9, -0.4, 1.3],
            };
            let e = law.mul(&x, &law.inv(&x));
            assert!(law.distance(&e, &law.identity()) < 1e-14, "{law:?}");
            let e = law.mul(&law.inv(&x), &x);
            assert!(law.distance(&e, &law.identity()) < 1e-14, "{law:?}");
        }
    }

    #[test]
    fn se2_angle_wraps() {
        let x = [3.0, 0.0, 0.0];
        let p = ChartLaw::Se2.mul(&x, &x);
        assert!(p[0].abs() <= PI);
        assert!((p[0] - (6.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn domain_checks() {
        assert!(!ChartLaw::AffineLine.in_domain(&[0.0, 1.0, 0.0]));
        assert!(!ChartLaw::AffineLine.in_domain(&[1.0, 1.0, 2.0]));
        assert!(ChartLaw::Heisenberg.in_domain(&[1.0, 1.0, 2.0]));
        assert!(!ChartLaw::Heisenberg.in_domain(&[f64::NAN, 1.0, 2.0]));
        assert!(!ChartLaw::Se2.in_domain(&[4.0, 0.0, 0.0]));
    }

    #[test]
    fn translated_regions_contain_translated_points() {
        let region = Region::new(&[-0.5, -1.0, 0.2], &[0.5, 1.0, 0.9]);
        let g = [0.7, -1.1, 0.3];
        let law = ChartLaw::Heisenberg;
        let left = law.left_translate_region(&g, &region);
        let right = law.right_translate_region(&region, &g);
        for x in region.grid(5) {
            assert!(left.contains_tol(&law.mul(&g, &x), 1e-12));
            assert!(right.contains_tol(&law.mul(&x, &g), 1e-12));
        }
    }
}
