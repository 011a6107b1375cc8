use std::collections::HashSet;

use super::{distance_coords, HyperPoint};
use crate::error::{Error, Result};

/// An ordered, labelled collection of points sharing one hyperboloid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    labels: Vec<String>,
    points: Vec<HyperPoint>,
}

impl PointConfiguration {
    pub fn new(labels: Vec<String>, points: Vec<HyperPoint>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::contract(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::domain("empty point configuration"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if l.is_empty() || !seen.insert(l.as_str()) {
                return Err(Error::Validation(format!("duplicate or empty label {l:?}")));
            }
        }
        for p in &points[1..] {
            points[0].same_space(p)?;
        }
        Ok(PointConfiguration { labels, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn rho(&self) -> f64 {
        self.points[0].rho()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> &[HyperPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &HyperPoint {
        &self.points[i]
    }

    pub(crate) fn set_point_coords(&mut self, i: usize, coords: &[f64]) {
        let rho = self.rho();
        self.points[i] = HyperPoint::from_coords_unchecked(coords.to_vec(), rho);
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance_coords(self.points[i].coords(), self.points[j].coords(), self.rho())
    }

    /// Maps every point through `x -> factor * x`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| p.scaled(factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointConfiguration {
            labels: self.labels.clone(),
            points,
        })
    }

    /// Re-validates hyperboloid membership of every point.
    pub fn check_invariants(&self) -> Result<()> {
        for p in &self.points {
            HyperPoint::new(p.coords().to_vec(), p.rho())?;
        }
        Ok(())
    }
}
