//! Maximization of the pairwise likelihood over point configurations by
//! per-point Riemannian gradient ascent.

mod trace;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypgeom::{chord_sq, exp_coords, minkowski, tangent_norm, HyperPoint, PointConfiguration, TangentVector, DEGENERATE_DISTANCE};
use crate::seqmodel::{per_site_loglik, per_site_loglik_slope, DiffRateMatrix};
use crate::treekit::DistanceMatrix;

pub use trace::{read_trace, TraceRecord, Tracer};

/// Size of the deterministic nudge applied to a point that has collided
/// with another at positive difference rate.
const COLLISION_NUDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimizerSettings {
    pub learning_rate: f64,
    /// Steps longer than this are truncated.
    pub max_step: f64,
    /// Converged once no point moves farther than this in a sweep.
    pub convergence_threshold: f64,
    pub max_iterations: usize,
    pub trace_every: usize,
    /// Compute every gradient of a sweep against the sweep-start
    /// configuration, in parallel. Off by default.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            learning_rate: 0.1,
            max_step: 0.05,
            convergence_threshold: 5e-5,
            max_iterations: 10_000,
            trace_every: 10,
            parallel: false,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.max_step, self.convergence_threshold]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive || self.max_iterations == 0 || self.trace_every == 0 {
            return Err(Error::Validation("optimizer settings must all be positive".into()));
        }
        if self.max_step < self.convergence_threshold {
            return Err(Error::Validation("max_step must be >= convergence_threshold".into()));
        }
        Ok(())
    }
}

fn check_matched(config: &PointConfiguration, stats: &DiffRateMatrix) -> Result<()> {
    if config.labels() != stats.labels() {
        return Err(Error::domain("configuration labels do not match the difference rates"));
    }
    if config.len() < 2 {
        return Err(Error::domain("the objective needs at least two points"));
    }
    Ok(())
}

/// The pairwise log-likelihood summed over ordered pairs `i != j`, scaled by
/// `1/L` (so each unordered pair contributes twice its per-site value).
pub fn objective(config: &PointConfiguration, stats: &DiffRateMatrix) -> Result<f64> {
    check_matched(config, stats)?;
    let n = config.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += per_site_loglik(stats.rate(i, j), config.distance(i, j));
        }
    }
    Ok(2.0 * total)
}

/// Adds the objective gradient at point `i` to `out`. Returns the index of a
/// point coinciding with `i` at positive difference rate, if any.
fn gradient_into(coords: &[&[f64]], rho: f64, stats: &DiffRateMatrix, i: usize, out: &mut [f64]) -> Option<usize> {
    let x = coords[i];
    let mut collision = None;
    for (j, y) in coords.iter().enumerate() {
        if j == i {
            continue;
        }
        let s_sq = chord_sq(x, y);
        let d = 2.0 * rho * (s_sq.sqrt() / (2.0 * rho)).asinh();
        let r = stats.rate(i, j);
        if d <= DEGENERATE_DISTANCE * rho {
            if r > 0.0 {
                collision = Some(j);
            }
            continue;
        }
        let w = 2.0 * per_site_loglik_slope(r, d);
        // w * grad d, with grad d = -log_x(y) / d
        let scale = -w / (rho * (d / rho).sinh());
        let c = s_sq / (2.0 * rho * rho);
        for ((o, xi), yi) in out.iter_mut().zip(x).zip(y.iter()) {
            *o += scale * ((yi - xi) - c * xi);
        }
    }
    collision
}

fn coord_views(config: &PointConfiguration) -> Vec<&[f64]> {
    config.points().iter().map(|p| p.coords()).collect()
}

fn non_finite(config: &PointConfiguration, stats: &DiffRateMatrix, i: usize) -> Error {
    let j = (0..config.len())
        .filter(|&j| j != i)
        .find(|&j| !per_site_loglik_slope(stats.rate(i, j), config.distance(i, j)).is_finite())
        .unwrap_or(if i == 0 { 1 } else { 0 });
    Error::NonFiniteGradient {
        point: i,
        label_i: config.labels()[i].clone(),
        label_j: config.labels()[j].clone(),
    }
}

/// Riemannian gradient of [`objective`] with respect to point `i`. Pairs of
/// coincident points contribute nothing.
pub fn point_gradient(config: &PointConfiguration, stats: &DiffRateMatrix, i: usize) -> Result<TangentVector> {
    check_matched(config, stats)?;
    if i >= config.len() {
        return Err(Error::contract(format!("point index {i} out of range")));
    }
    let mut g = vec![0.0; config.dim() + 1];
    gradient_into(&coord_views(config), config.rho(), stats, i, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(non_finite(config, stats, i));
    }
    TangentVector::project(config.point(i).clone(), &g)
}

/// Fixed tangent of length `len` at `x`, used to separate collided points.
fn nudge(x: &[f64], rho: f64, len: f64) -> Vec<f64> {
    for axis in 0..x.len() - 1 {
        let mut e = vec![0.0; x.len()];
        e[axis] = 1.0;
        let c = minkowski(x, &e) / (rho * rho);
        for (ei, xi) in e.iter_mut().zip(x) {
            *ei += c * xi;
        }
        let n = tangent_norm(&e);
        if n > 1e-6 {
            return e.iter().map(|v| v * len / n).collect();
        }
    }
    unreachable!("the tangent space has dimension >= 1")
}

/// Scales `v` to `alpha v`, truncated to length `max_step`; returns the length.
fn scaled_step(v: &mut [f64], settings: &OptimizerSettings) -> f64 {
    for a in v.iter_mut() {
        *a *= settings.learning_rate;
    }
    let n = tangent_norm(v);
    if n > settings.max_step {
        let f = settings.max_step / n;
        for a in v.iter_mut() {
            *a *= f;
        }
        settings.max_step
    } else {
        n
    }
}

/// One sweep over all points. In the default mode points are moved in
/// ascending order, each gradient seeing the points already moved this
/// sweep. Returns the largest step taken.
pub fn ascent_step(
    config: &PointConfiguration,
    stats: &DiffRateMatrix,
    settings: &OptimizerSettings,
) -> Result<(PointConfiguration, f64)> {
    check_matched(config, stats)?;
    let mut next = config.clone();
    let max = sweep(&mut next, stats, settings)?;
    Ok((next, max))
}

fn sweep(config: &mut PointConfiguration, stats: &DiffRateMatrix, settings: &OptimizerSettings) -> Result<f64> {
    let rho = config.rho();
    let dim = config.dim() + 1;
    let n = config.len();
    let mut max_step = 0.0f64;
    if settings.parallel {
        let grads: Vec<(Vec<f64>, Option<usize>)> = {
            let views = coord_views(config);
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut g = vec![0.0; dim];
                    let hit = gradient_into(&views, rho, stats, i, &mut g);
                    (g, hit)
                })
                .collect()
        };
        for (i, (mut g, hit)) in grads.into_iter().enumerate() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(non_finite(config, stats, i));
            }
            let mut x = config.point(i).coords().to_vec();
            let mut y = vec![0.0; dim];
            if hit.is_some() {
                exp_coords(&x, &nudge(&x, rho, COLLISION_NUDGE), rho, &mut y);
                x.copy_from_slice(&y);
            }
            let len = scaled_step(&mut g, settings);
            exp_coords(&x, &g, rho, &mut y);
            config.set_point_coords(i, &y);
            max_step = max_step.max(len);
        }
        return Ok(max_step);
    }
    let mut g = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for i in 0..n {
        g.iter_mut().for_each(|v| *v = 0.0);
        let hit = gradient_into(&coord_views(config), rho, stats, i, &mut g);
        if hit.is_some() {
            let x = config.point(i).coords().to_vec();
            exp_coords(&x, &nudge(&x, rho, COLLISION_NUDGE), rho, &mut y);
            config.set_point_coords(i, &y);
            g.iter_mut().for_each(|v| *v = 0.0);
            gradient_into(&coord_views(config), rho, stats, i, &mut g);
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(non_finite(config, stats, i));
        }
        let len = scaled_step(&mut g, settings);
        exp_coords(config.point(i).coords(), &g, rho, &mut y);
        config.set_point_coords(i, &y);
        max_step = max_step.max(len);
    }
    Ok(max_step)
}

/// Result of [`optimize`].
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub config: PointConfiguration,
    pub trace: Vec<TraceRecord>,
    /// Number of sweeps performed.
    pub sweeps: usize,
    pub converged: bool,
}

/// Runs sweeps until no point moves farther than the convergence threshold,
/// or until `max_iterations`. A trace record is taken before the first sweep,
/// every `trace_every` sweeps and after the last one.
pub fn optimize(
    initial: &PointConfiguration,
    stats: &DiffRateMatrix,
    settings: &OptimizerSettings,
    mut tracer: Option<&mut Tracer<'_>>,
) -> Result<OptimizeOutcome> {
    settings.validate()?;
    check_matched(initial, stats)?;
    let mut config = initial.clone();
    let mut trace = Vec::new();
    let mut record = |config: &PointConfiguration, iteration: usize, step: f64, tracer: &mut Option<&mut Tracer<'_>>| -> Result<()> {
        let mut rec = TraceRecord::new(iteration, objective(config, stats)?, step);
        if let Some(t) = tracer.as_deref_mut() {
            t.fill(&mut rec, config)?;
            t.emit(&rec)?;
        }
        trace.push(rec);
        Ok(())
    };
    record(&config, 0, 0.0, &mut tracer)?;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < settings.max_iterations {
        let step = sweep(&mut config, stats, settings)?;
        sweeps += 1;
        converged = step < settings.convergence_threshold;
        if sweeps % settings.trace_every == 0 || converged || sweeps == settings.max_iterations {
            record(&config, sweeps, step, &mut tracer)?;
        }
        if converged {
            break;
        }
    }
    Ok(OptimizeOutcome {
        config,
        trace,
        sweeps,
        converged,
    })
}

/// Hyperbolic distances between all points of a configuration.
pub fn config_distances(config: &PointConfiguration) -> DistanceMatrix {
    let n = config.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = config.distance(i, j);
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    DistanceMatrix::new(config.labels().to_vec(), rows).expect("hyperbolic distances form a valid matrix")
}

/// Builds a configuration from raw coordinates, checking each point.
pub fn configuration_from_coords(labels: Vec<String>, coords: Vec<Vec<f64>>, rho: f64) -> Result<PointConfiguration> {
    let points = coords
        .into_iter()
        .map(|c| HyperPoint::new(c, rho))
        .collect::<Result<Vec<_>>>()?;
    PointConfiguration::new(labels, points)
}
