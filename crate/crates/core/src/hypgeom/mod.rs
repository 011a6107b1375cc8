//! Geometry of the hyperboloid model of hyperbolic space.
//!
//! Points of hyperbolic m-space of radius `rho` live in Minkowski space
//! R^(m+1) on the upper sheet `<x, x>_M = -rho^2`, `x[m] > 0`, where
//! `<u, v>_M = sum_{i<m} u_i v_i - u_m v_m`. The last coordinate is the
//! time-like one. Sectional curvature is `-1/rho^2`.
//!
//! Distances, the logarithm and the distance gradient are evaluated through
//! the Minkowski chord `s^2 = <x - y, x - y>_M`, using
//! `cosh(d / rho) = 1 + s^2 / (2 rho^2)`; this is the same quantity as
//! `-<x, y>_M / rho^2` but does not lose precision for nearby points.

mod configuration;
mod fourpoint;
mod poincare;

pub use configuration::PointConfiguration;
pub use fourpoint::{
    four_point_delta, max_quadruple_delta, quadruple_delta, sampled_delta, QuadrupleDelta,
    EXHAUSTIVE_LIMIT,
};
pub use poincare::{from_poincare, poincare_distance, to_poincare, PoincarePoint};

use crate::error::{Error, Result};

/// Relative tolerance on `<x, x>_M = -rho^2`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Relative tolerance on `<base, v>_M = 0` for tangent vectors.
pub const TANGENT_TOL: f64 = 1e-9;

/// Two points closer than `DEGENERATE_DISTANCE * rho` count as coincident.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

/// The Minkowski bilinear form on equal-length vectors of length >= 3.
pub fn minkowski_form(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::contract(format!(
            "minkowski form of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 3 {
        return Err(Error::contract(format!(
            "minkowski form needs ambient dimension >= 3, got {}",
            u.len()
        )));
    }
    Ok(minkowski(u, v))
}

#[inline]
pub(crate) fn minkowski(u: &[f64], v: &[f64]) -> f64 {
    let last = u.len() - 1;
    let spatial: f64 = u[..last].iter().zip(&v[..last]).map(|(a, b)| a * b).sum();
    spatial - u[last] * v[last]
}

#[inline]
fn euclidean_norm(u: &[f64]) -> f64 {
    u.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `<x - y, x - y>_M`, clamped at zero.
#[inline]
pub(crate) fn chord_sq(x: &[f64], y: &[f64]) -> f64 {
    let last = x.len() - 1;
    let spatial: f64 = x[..last]
        .iter()
        .zip(&y[..last])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let dt = x[last] - y[last];
    (spatial - dt * dt).max(0.0)
}

#[inline]
pub(crate) fn distance_coords(x: &[f64], y: &[f64], rho: f64) -> f64 {
    let s = chord_sq(x, y).sqrt();
    2.0 * rho * (s / (2.0 * rho)).asinh()
}

/// Recomputes the time-like coordinate from the spatial ones.
#[inline]
pub(crate) fn renormalize(coords: &mut [f64], rho: f64) {
    let last = coords.len() - 1;
    let spatial_sq: f64 = coords[..last].iter().map(|a| a * a).sum();
    coords[last] = (rho * rho + spatial_sq).sqrt();
}

/// Tangent norm of an ambient vector under the restricted Minkowski form.
#[inline]
pub(crate) fn tangent_norm(v: &[f64]) -> f64 {
    minkowski(v, v).max(0.0).sqrt()
}

/// Geodesic step from `x` along the tangent `v`, written into `out`.
pub(crate) fn exp_coords(x: &[f64], v: &[f64], rho: f64, out: &mut [f64]) {
    let norm = tangent_norm(v);
    if norm == 0.0 {
        out.copy_from_slice(x);
        return;
    }
    let a = norm / rho;
    let c = a.cosh();
    let s = rho * a.sinh() / norm;
    for ((o, xi), vi) in out.iter_mut().zip(x).zip(v) {
        *o = c * xi + s * vi;
    }
    renormalize(out, rho);
}

/// Adds `weight * grad_x d(x, y)` to `out`. Returns false (adding nothing)
/// when the points coincide, where the distance is not differentiable.
pub(crate) fn accumulate_distance_gradient(
    x: &[f64],
    y: &[f64],
    rho: f64,
    weight: f64,
    out: &mut [f64],
) -> bool {
    let s_sq = chord_sq(x, y);
    let d = 2.0 * rho * (s_sq.sqrt() / (2.0 * rho)).asinh();
    if d <= DEGENERATE_DISTANCE * rho {
        return false;
    }
    // log_x(y) = d / (rho sinh(d/rho)) * ((y - x) - s^2/(2 rho^2) x); grad = -log / d
    let scale = -weight / (rho * (d / rho).sinh());
    let c = s_sq / (2.0 * rho * rho);
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o += scale * ((yi - xi) - c * xi);
    }
    true
}

/// A point on the hyperboloid of radius `rho` in Minkowski coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperPoint {
    coords: Vec<f64>,
    rho: f64,
}

impl HyperPoint {
    /// Validates hyperboloid membership (relative tolerance
    /// [`MEMBERSHIP_TOL`]), the upper sheet, and `m >= 2`.
    pub fn new(coords: Vec<f64>, rho: f64) -> Result<Self> {
        check_radius(rho)?;
        if coords.len() < 3 {
            return Err(Error::contract(format!(
                "hyperboloid dimension must be >= 2, got {}",
                coords.len().saturating_sub(1)
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::contract("non-finite coordinate"));
        }
        let last = coords[coords.len() - 1];
        if last <= 0.0 {
            return Err(Error::contract("point lies on the lower sheet"));
        }
        let form = minkowski(&coords, &coords);
        let scale = coords.iter().map(|c| c * c).sum::<f64>();
        if (form + rho * rho).abs() > MEMBERSHIP_TOL * scale {
            return Err(Error::contract(format!(
                "point not on hyperboloid of radius {rho}: <x,x> = {form}"
            )));
        }
        Ok(HyperPoint { coords, rho })
    }

    /// Lifts spatial coordinates onto the hyperboloid.
    pub fn from_spatial(spatial: &[f64], rho: f64) -> Result<Self> {
        check_radius(rho)?;
        if spatial.len() < 2 {
            return Err(Error::contract("hyperboloid dimension must be >= 2"));
        }
        let mut coords = spatial.to_vec();
        coords.push(0.0);
        renormalize(&mut coords, rho);
        HyperPoint::new(coords, rho)
    }

    /// The basepoint `(0, ..., 0, rho)`.
    pub fn basepoint(m: usize, rho: f64) -> Result<Self> {
        let mut coords = vec![0.0; m + 1];
        coords[m] = rho;
        HyperPoint::new(coords, rho)
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<f64>, rho: f64) -> Self {
        HyperPoint { coords, rho }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Dimension m of the hyperboloid (ambient dimension m + 1).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// The image of this point under `x -> factor * x`, a point of the
    /// hyperboloid of radius `factor * rho`. Distances scale by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_radius(factor)?;
        let coords = self.coords.iter().map(|c| c * factor).collect();
        HyperPoint::new(coords, self.rho * factor)
    }

    pub(crate) fn same_space(&self, other: &HyperPoint) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::contract(format!(
                "points of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if (self.rho - other.rho).abs() > 1e-12 * self.rho {
            return Err(Error::contract(format!(
                "points on hyperboloids of radius {} and {}",
                self.rho, other.rho
            )));
        }
        Ok(())
    }
}

fn check_radius(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::contract(format!("radius must be positive, got {rho}")));
    }
    Ok(())
}

/// A vector in the tangent space at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: HyperPoint,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Checks `<base, vec>_M = 0` to [`TANGENT_TOL`], relative to the
    /// Euclidean sizes of the two vectors.
    pub fn new(base: HyperPoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.coords.len() {
            return Err(Error::contract(format!(
                "tangent vector of length {} at a point of length {}",
                vec.len(),
                base.coords.len()
            )));
        }
        let form = minkowski(&base.coords, &vec);
        let scale = euclidean_norm(&base.coords) * euclidean_norm(&vec);
        if form.abs() > TANGENT_TOL * scale {
            return Err(Error::contract(format!(
                "vector is not tangent at the base point: <x,v> = {form}"
            )));
        }
        Ok(TangentVector { base, vec })
    }

    pub fn zero(base: HyperPoint) -> Self {
        let vec = vec![0.0; base.coords.len()];
        TangentVector { base, vec }
    }

    /// Orthogonal projection of an arbitrary ambient vector onto the tangent
    /// space at `base`: `v + <x, v>_M / rho^2 * x`.
    pub fn project(base: HyperPoint, ambient: &[f64]) -> Result<Self> {
        if ambient.len() != base.coords.len() {
            return Err(Error::contract("ambient vector has the wrong length"));
        }
        let vec = project_coords(&base.coords, base.rho, ambient);
        Ok(TangentVector { base, vec })
    }

    pub(crate) fn from_parts_unchecked(base: HyperPoint, vec: Vec<f64>) -> Self {
        TangentVector { base, vec }
    }

    pub fn base(&self) -> &HyperPoint {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.vec
    }

    pub fn norm(&self) -> f64 {
        tangent_norm(&self.vec)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TangentVector {
            base: self.base.clone(),
            vec: self.vec.iter().map(|v| v * factor).collect(),
        }
    }

    /// Restricted Minkowski inner product with another tangent at the same base.
    pub fn dot(&self, other: &TangentVector) -> Result<f64> {
        self.base.same_space(&other.base)?;
        Ok(minkowski(&self.vec, &other.vec))
    }
}

pub(crate) fn project_coords(x: &[f64], rho: f64, v: &[f64]) -> Vec<f64> {
    let c = minkowski(x, v) / (rho * rho);
    v.iter().zip(x).map(|(vi, xi)| vi + c * xi).collect()
}

/// Geodesic distance `rho * arccosh(-<x, y>_M / rho^2)`.
pub fn hyperbolic_distance(x: &HyperPoint, y: &HyperPoint) -> Result<f64> {
    x.same_space(y)?;
    Ok(distance_coords(&x.coords, &y.coords, x.rho))
}

/// The exponential map: the point at distance `|v|` from `base` along the
/// geodesic with initial direction `v`. The result is re-projected onto the
/// hyperboloid.
pub fn exp_map(base: &HyperPoint, v: &TangentVector) -> Result<HyperPoint> {
    base.same_space(&v.base)?;
    let tol = 1e-9 * euclidean_norm(&base.coords);
    if base
        .coords
        .iter()
        .zip(&v.base.coords)
        .any(|(a, b)| (a - b).abs() > tol)
    {
        return Err(Error::contract("tangent vector is based at a different point"));
    }
    let form = minkowski(&base.coords, &v.vec);
    let scale = euclidean_norm(&base.coords) * euclidean_norm(&v.vec);
    if form.abs() > TANGENT_TOL * scale {
        return Err(Error::contract(format!(
            "vector is not tangent at the base point: <x,v> = {form}"
        )));
    }
    let mut out = vec![0.0; base.coords.len()];
    exp_coords(&base.coords, &v.vec, base.rho, &mut out);
    Ok(HyperPoint::from_coords_unchecked(out, base.rho))
}

/// The logarithm map, inverse of [`exp_map`]: `|log_x(y)| = d(x, y)`.
pub fn log_map(base: &HyperPoint, y: &HyperPoint) -> Result<TangentVector> {
    base.same_space(y)?;
    let rho = base.rho;
    let (x, yc) = (&base.coords, &y.coords);
    let s_sq = chord_sq(x, yc);
    let d = 2.0 * rho * (s_sq.sqrt() / (2.0 * rho)).asinh();
    if d == 0.0 {
        return Ok(TangentVector::zero(base.clone()));
    }
    let scale = d / (rho * (d / rho).sinh());
    let c = s_sq / (2.0 * rho * rho);
    let vec = x
        .iter()
        .zip(yc)
        .map(|(xi, yi)| scale * ((yi - xi) - c * xi))
        .collect();
    Ok(TangentVector::from_parts_unchecked(base.clone(), vec))
}

/// Gradient at `x` of `d(., y)`, with a flag for the coincident case.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGradient {
    pub tangent: TangentVector,
    /// True when `x` and `y` coincide; `tangent` is then zero.
    pub degenerate: bool,
}

/// Unit tangent at `x` pointing directly away from `y`.
pub fn distance_gradient(x: &HyperPoint, y: &HyperPoint) -> Result<DistanceGradient> {
    x.same_space(y)?;
    let mut vec = vec![0.0; x.coords.len()];
    let ok = accumulate_distance_gradient(&x.coords, &y.coords, x.rho, 1.0, &mut vec);
    Ok(DistanceGradient {
        tangent: TangentVector::from_parts_unchecked(x.clone(), vec),
        degenerate: !ok,
    })
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn p(coords: &[f64], rho: f64) -> HyperPoint {
        HyperPoint::new(coords.to_vec(), rho).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn minkowski_form_examples() {
        assert_eq!(minkowski_form(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap(), -1.0);
        assert_eq!(minkowski_form(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(minkowski_form(&[3.0, 0.0, 2.0], &[1.0, 0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn minkowski_form_rejects_mismatch() {
        assert!(matches!(
            minkowski_form(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::Contract(_))
        ));
        assert!(minkowski_form(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn membership_is_validated() {
        assert!(HyperPoint::new(vec![1.0, 0.0, 1.0], 1.0).is_err());
        assert!(HyperPoint::new(vec![0.0, 0.0, -1.0], 1.0).is_err());
        assert!(HyperPoint::new(vec![0.0, 1.0], 1.0).is_err());
        let x = p(&[1f64.sinh(), 0.0, 1f64.cosh()], 1.0);
        assert_eq!(x.dim(), 2);
    }

    #[test]
    fn distance_identity_and_mismatch() {
        let b = HyperPoint::basepoint(3, 0.5).unwrap();
        assert_eq!(hyperbolic_distance(&b, &b).unwrap(), 0.0);
        let other = HyperPoint::basepoint(3, 1.0).unwrap();
        assert!(matches!(hyperbolic_distance(&b, &other), Err(Error::Contract(_))));
        let other = HyperPoint::basepoint(2, 0.5).unwrap();
        assert!(hyperbolic_distance(&b, &other).is_err());
    }

    #[test]
    fn distance_matches_arccosh_form() {
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let x = random_point(&mut rng, 3, 0.7, 3.0);
            let y = random_point(&mut rng, 3, 0.7, 3.0);
            let arg = (-minkowski(x.coords(), y.coords()) / 0.49).max(1.0);
            let expected = 0.7 * arg.acosh();
            let got = hyperbolic_distance(&x, &y).unwrap();
            assert!((got - expected).abs() < 1e-7, "{got} vs {expected}");
        }
    }

    #[test]
    fn exp_map_examples() {
        let b = HyperPoint::basepoint(2, 1.0).unwrap();
        let zero = TangentVector::zero(b.clone());
        assert_eq!(exp_map(&b, &zero).unwrap(), b);

        let v = TangentVector::new(b.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let y = exp_map(&b, &v).unwrap();
        let expected = [1f64.sinh(), 0.0, 1f64.cosh()];
        assert!(max_abs_diff(y.coords(), &expected) < 1e-14);
        assert!((hyperbolic_distance(&b, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_map_rejects_non_tangent() {
        let b = HyperPoint::basepoint(2, 1.0).unwrap();
        assert!(TangentVector::new(b.clone(), vec![0.0, 0.0, 1.0]).is_err());
        let elsewhere = p(&[1f64.sinh(), 0.0, 1f64.cosh()], 1.0);
        let v = TangentVector::new(elsewhere, vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(exp_map(&b, &v), Err(Error::Contract(_))));
    }

    #[test]
    fn log_map_examples() {
        let x = HyperPoint::basepoint(2, 1.0).unwrap();
        assert_eq!(log_map(&x, &x).unwrap().vec(), &[0.0, 0.0, 0.0]);
        let y = p(&[1f64.sinh(), 0.0, 1f64.cosh()], 1.0);
        let v = log_map(&x, &y).unwrap();
        assert!(max_abs_diff(v.vec(), &[1.0, 0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn distance_gradient_example() {
        let x = HyperPoint::basepoint(2, 1.0).unwrap();
        let y = p(&[1f64.sinh(), 0.0, 1f64.cosh()], 1.0);
        let g = distance_gradient(&x, &y).unwrap();
        assert!(!g.degenerate);
        assert!(max_abs_diff(g.tangent.vec(), &[-1.0, 0.0, 0.0]) < 1e-12);

        let g = distance_gradient(&x, &x).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.tangent.norm(), 0.0);
    }

    #[test]
    fn radius_scaling_of_distance() {
        let mut rng = rng_from_seed(11);
        for &rho in &[0.2, 0.5, 3.0] {
            for _ in 0..100 {
                let x = random_point(&mut rng, 2, 1.0, 4.0);
                let y = random_point(&mut rng, 2, 1.0, 4.0);
                let d1 = hyperbolic_distance(&x, &y).unwrap();
                let dr = hyperbolic_distance(&x.scaled(rho).unwrap(), &y.scaled(rho).unwrap())
                    .unwrap();
                assert!((dr - rho * d1).abs() <= 1e-12 * (1.0 + rho * d1));
            }
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let mut rng = rng_from_seed(5);
        let h = 1e-4;
        for &(m, rho) in &[(2, 1.0), (3, 0.2), (10, 0.5)] {
            for _ in 0..100 {
                let x = random_point(&mut rng, m, rho, 3.0 * rho);
                let y = random_point(&mut rng, m, rho, 3.0 * rho);
                let u = random_unit_tangent(&mut rng, &x);
                let g = distance_gradient(&x, &y).unwrap().tangent;
                let analytic = g.dot(&u).unwrap();
                let plus = exp_map(&x, &u.scaled(h)).unwrap();
                let minus = exp_map(&x, &u.scaled(-h)).unwrap();
                let fd = (hyperbolic_distance(&plus, &y).unwrap()
                    - hyperbolic_distance(&minus, &y).unwrap())
                    / (2.0 * h);
                let err = (fd - analytic).abs() / analytic.abs().max(1e-2);
                assert!(err < 1e-5, "m={m} rho={rho}: fd {fd} vs {analytic}");
            }
        }
    }

    proptest! {
        #[test]
        fn exp_log_inverse(seed in any::<u64>(), m in 2usize..8, rho in 0.1f64..2.0) {
            let mut rng = rng_from_seed(seed);
            let x = random_point(&mut rng, m, rho, 4.0 * rho);
            let y = random_point(&mut rng, m, rho, 4.0 * rho);
            let v = log_map(&x, &y).unwrap();
            prop_assert!((v.norm() - hyperbolic_distance(&x, &y).unwrap()).abs() < 1e-9);
            let back = exp_map(&x, &v).unwrap();
            // coordinates grow like cosh(r / rho); compare relative to their size
            let scale = y.coords().iter().fold(1.0f64, |a, b| a.max(b.abs()));
            prop_assert!(max_abs_diff(back.coords(), y.coords()) < 1e-9 * scale);
            let g = distance_gradient(&x, &y).unwrap();
            prop_assert!((g.tangent.norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn exp_stays_on_hyperboloid(seed in any::<u64>(), m in 2usize..12, len in 0.0f64..5.0) {
            let mut rng = rng_from_seed(seed);
            let x = random_point(&mut rng, m, 0.5, 2.0);
            let u = random_unit_tangent(&mut rng, &x);
            let y = exp_map(&x, &u.scaled(len)).unwrap();
            prop_assert!(HyperPoint::new(y.coords().to_vec(), 0.5).is_ok());
            prop_assert!((hyperbolic_distance(&x, &y).unwrap() - len).abs() < 1e-9 * (1.0 + len));
        }

        #[test]
        fn metric_axioms(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let pts: Vec<_> = (0..3).map(|_| random_point(&mut rng, 3, 0.5, 2.0)).collect();
            let d = |i: usize, j: usize| hyperbolic_distance(&pts[i], &pts[j]).unwrap();
            prop_assert_eq!(d(0, 1), d(1, 0));
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
            prop_assert!(d(0, 1) > 0.0);
        }
    }
}
