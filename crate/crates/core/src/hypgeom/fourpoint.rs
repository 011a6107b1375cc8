//! Gromov four-point diagnostics.
//!
//! For a quadruple (x, y, z, w) the three pairing sums are
//! `d(x,w) + d(y,z)`, `d(x,y) + d(z,w)` and `d(x,z) + d(y,w)`. The smallest
//! `delta` making the relaxed four-point inequality hold for the quadruple is
//! half the gap between the largest and second-largest sum. Tree metrics give
//! zero on every quadruple.

use rand::seq::index;

use super::PointConfiguration;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Configurations with at most this many points are scanned exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupleDelta {
    /// Point indices, ascending.
    pub indices: [usize; 4],
    pub delta: f64,
}

pub fn four_point_delta(d: &[[f64; 4]; 4]) -> f64 {
    let mut sums = [
        d[0][3] + d[1][2],
        d[0][1] + d[2][3],
        d[0][2] + d[1][3],
    ];
    sums.sort_by(|a, b| b.total_cmp(a));
    (sums[0] - sums[1]) / 2.0
}

pub fn quadruple_delta(indices: [usize; 4], dist: impl Fn(usize, usize) -> f64) -> QuadrupleDelta {
    let mut d = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in (a + 1)..4 {
            let v = dist(indices[a], indices[b]);
            d[a][b] = v;
            d[b][a] = v;
        }
    }
    QuadrupleDelta {
        indices,
        delta: four_point_delta(&d),
    }
}

fn choose4(n: usize) -> u128 {
    let n = n as u128;
    if n < 4 {
        0
    } else {
        n * (n - 1) * (n - 2) * (n - 3) / 24
    }
}

/// Largest four-point delta over the `n` points addressed by `dist`.
///
/// All quadruples are visited when `n <= EXHAUSTIVE_LIMIT` or there are no
/// more than `n_samples` of them; otherwise `n_samples` quadruples of
/// distinct indices are drawn from a generator seeded with `seed`.
pub fn max_quadruple_delta(
    n: usize,
    n_samples: usize,
    seed: u64,
    dist: impl Fn(usize, usize) -> f64,
) -> Result<QuadrupleDelta> {
    if n < 4 {
        return Err(Error::domain(format!("four-point delta needs >= 4 points, got {n}")));
    }
    let mut best: Option<QuadrupleDelta> = None;
    let mut consider = |q: QuadrupleDelta| {
        if best.is_none_or(|b| q.delta > b.delta) {
            best = Some(q);
        }
    };
    if n <= EXHAUSTIVE_LIMIT || choose4(n) <= n_samples as u128 {
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for e in (c + 1)..n {
                        consider(quadruple_delta([a, b, c, e], &dist));
                    }
                }
            }
        }
    } else {
        if n_samples == 0 {
            return Err(Error::domain("n_samples must be positive"));
        }
        let mut rng = rng_from_seed(seed);
        for _ in 0..n_samples {
            let mut idx = [0usize; 4];
            for (slot, i) in idx.iter_mut().zip(index::sample(&mut rng, n, 4)) {
                *slot = i;
            }
            idx.sort_unstable();
            consider(quadruple_delta(idx, &dist));
        }
    }
    Ok(best.expect("at least one quadruple"))
}

/// Monte Carlo estimate (exact for small configurations) of the
/// configuration's four-point delta. Deterministic given `seed`.
pub fn sampled_delta(
    config: &PointConfiguration,
    n_samples: usize,
    seed: u64,
) -> Result<QuadrupleDelta> {
    max_quadruple_delta(config.len(), n_samples, seed, |i, j| config.distance(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeom::testutil::random_point;
    use crate::hypgeom::HyperPoint;
    use crate::rng::rng_from_seed;

    fn config(points: Vec<HyperPoint>) -> PointConfiguration {
        let labels = (0..points.len()).map(|i| format!("p{i}")).collect();
        PointConfiguration::new(labels, points).unwrap()
    }

    #[test]
    fn unit_square_delta() {
        let s = 2f64.sqrt();
        // corners in cyclic order x, y, z, w
        let d = [
            [0.0, 1.0, s, 1.0],
            [1.0, 0.0, 1.0, s],
            [s, 1.0, 0.0, 1.0],
            [1.0, s, 1.0, 0.0],
        ];
        assert!((four_point_delta(&d) - (s - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn tree_quartet_is_zero() {
        // ((a:1,b:2):3,(c:4,d:5))
        let d = [
            [0.0, 3.0, 8.0, 9.0],
            [3.0, 0.0, 9.0, 10.0],
            [8.0, 9.0, 0.0, 9.0],
            [9.0, 10.0, 9.0, 0.0],
        ];
        assert_eq!(four_point_delta(&d), 0.0);
    }

    #[test]
    fn too_few_points() {
        let pts = (0..3)
            .map(|_| HyperPoint::basepoint(2, 1.0).unwrap())
            .collect::<Vec<_>>();
        assert!(matches!(sampled_delta(&config(pts), 10, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn plane_bound_and_scaling() {
        let mut rng = rng_from_seed(99);
        let pts: Vec<_> = (0..60).map(|_| random_point(&mut rng, 2, 1.0, 5.0)).collect();
        let c1 = config(pts);
        let q1 = sampled_delta(&c1, 3000, 4).unwrap();
        assert!(q1.delta <= 2f64.ln() + 1e-9);
        assert!(q1.delta > 0.0);
        for &rho in &[0.2, 0.5] {
            let qr = sampled_delta(&c1.scaled(rho).unwrap(), 3000, 4).unwrap();
            assert_eq!(qr.indices, q1.indices);
            assert!((qr.delta - rho * q1.delta).abs() < 1e-12);
        }
        // determinism
        assert_eq!(sampled_delta(&c1, 3000, 4).unwrap(), q1);
    }

    #[test]
    fn small_configs_are_exhaustive() {
        let mut rng = rng_from_seed(1);
        let pts: Vec<_> = (0..8).map(|_| random_point(&mut rng, 3, 0.5, 2.0)).collect();
        let c = config(pts);
        assert_eq!(sampled_delta(&c, 1, 0).unwrap(), sampled_delta(&c, 1, 12345).unwrap());
    }
}
