//! Hyperboloid basics: points, geodesic distance, exponential and logarithm
//! maps, the distance gradient and the Poincaré ball.
//!
//! cargo run --example geometry

use hyptree::hypgeom::{
    distance_gradient, exp_map, hyperbolic_distance, log_map, poincare_distance, to_poincare, HyperPoint,
    TangentVector,
};

fn main() -> hyptree::Result<()> {
    let rho = 0.5;
    let x = HyperPoint::from_spatial(&[0.3, -0.2], rho)?;
    let y = HyperPoint::from_spatial(&[-0.4, 0.6], rho)?;
    let d = hyperbolic_distance(&x, &y)?;
    println!("x = {:?}\ny = {:?}\nd(x, y) = {d:.12}", x.coords(), y.coords());

    let v = log_map(&x, &y)?;
    println!("|log_x y| = {:.12} (equals the distance)", v.norm());
    let back = exp_map(&x, &v)?;
    let err = back.coords().iter().zip(y.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("exp_x(log_x y) recovers y to {err:.1e}");

    let g = distance_gradient(&x, &y)?;
    println!("grad_x d(x, y) = {:?}", g.tangent.vec());

    let step = TangentVector::project(x.clone(), &[0.0, 0.1, 0.0])?;
    let moved = exp_map(&x, &step)?;
    println!("moving {:.3} along a tangent changes the distance by {:.3}", step.norm(), hyperbolic_distance(&x, &moved)?);

    let (px, py) = (to_poincare(&x), to_poincare(&y));
    println!("Poincaré: {:?} {:?}, distance {:.12}", px.coords(), py.coords(), poincare_distance(&px, &py)?);
    Ok(())
}
