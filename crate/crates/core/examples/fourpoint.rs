//! Four-point diagnostics: tree metrics satisfy the condition exactly,
//! hyperbolic configurations violate it by at most rho ln 2 in the plane.
//!
//! cargo run --release --example fourpoint

use hyptree::hypgeom::{max_quadruple_delta, sampled_delta, HyperPoint, PointConfiguration};
use hyptree::rng::rng_from_seed;
use hyptree::treekit::{leaf_distances, random_topology, sample_edge_lengths};
use rand::Rng;

fn random_configuration(n: usize, rho: f64, radius: f64, seed: u64) -> hyptree::Result<PointConfiguration> {
    let mut rng = rng_from_seed(seed);
    let points = (0..n)
        .map(|_| {
            // Uniform direction, radius spread over the ball.
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let r = rho * (radius * rng.random::<f64>()).sinh();
            HyperPoint::from_spatial(&[r * theta.cos(), r * theta.sin()], rho)
        })
        .collect::<hyptree::Result<Vec<_>>>()?;
    PointConfiguration::new((0..n).map(|i| format!("p{i}")).collect(), points)
}

fn main() -> hyptree::Result<()> {
    let tree = sample_edge_lengths(&random_topology(12, 4)?, 0.05, 0.5, 5)?;
    let d = leaf_distances(&tree);
    let q = max_quadruple_delta(d.len(), 0, 0, |i, j| d.get(i, j))?;
    println!("tree metric, all quadruples: delta = {}", q.delta);

    for rho in [0.2, 0.5, 1.0] {
        let c = random_configuration(200, rho, 5.0, 9)?;
        let q = sampled_delta(&c, 10_000, 1)?;
        println!("rho = {rho}: sampled delta {:.4}, bound {:.4}", q.delta, rho * std::f64::consts::LN_2);
    }
    Ok(())
}
