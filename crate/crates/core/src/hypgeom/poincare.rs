//! Poincaré ball coordinates, used for plotting.

use super::{renormalize, HyperPoint};
use crate::error::{Error, Result};

/// A point strictly inside the Euclidean ball of radius `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint {
    coords: Vec<f64>,
    rho: f64,
}

impl PoincarePoint {
    pub fn new(coords: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("radius must be positive, got {rho}")));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm < rho) {
            return Err(Error::domain(format!(
                "point of norm {norm} outside the ball of radius {rho}"
            )));
        }
        Ok(PoincarePoint { coords, rho })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Hyperboloid to ball: `rho / (x_last + rho) * (x_1, ..., x_m)`.
pub fn to_poincare(x: &HyperPoint) -> PoincarePoint {
    let rho = x.rho();
    let last = x.coords()[x.dim()];
    let f = rho / (last + rho);
    PoincarePoint {
        coords: x.spatial().iter().map(|c| f * c).collect(),
        rho,
    }
}

/// Ball to hyperboloid, the inverse of [`to_poincare`]. With
/// `s = |y|^2 / rho^2` the image is `(2 y / (1 - s), rho (1 + s) / (1 - s))`.
pub fn from_poincare(y: &PoincarePoint) -> HyperPoint {
    let rho = y.rho;
    let s = y.coords.iter().map(|c| c * c).sum::<f64>() / (rho * rho);
    let f = 2.0 / (1.0 - s);
    let mut coords: Vec<f64> = y.coords.iter().map(|c| f * c).collect();
    coords.push(0.0);
    renormalize(&mut coords, rho);
    HyperPoint::from_coords_unchecked(coords, rho)
}

/// Distance in the ball model of radius `rho`.
pub fn poincare_distance(a: &PoincarePoint, b: &PoincarePoint) -> Result<f64> {
    if a.coords.len() != b.coords.len() || (a.rho - b.rho).abs() > 1e-12 * a.rho {
        return Err(Error::contract("poincare points from different balls"));
    }
    let rho = a.rho;
    let diff: f64 = a.coords.iter().zip(&b.coords).map(|(x, y)| (x - y) * (x - y)).sum();
    let na: f64 = a.coords.iter().map(|c| c * c).sum();
    let nb: f64 = b.coords.iter().map(|c| c * c).sum();
    let arg = 1.0 + 2.0 * rho * rho * diff / ((rho * rho - na) * (rho * rho - nb));
    Ok(rho * arg.max(1.0).acosh())
}
