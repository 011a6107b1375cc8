use crate::embedder::{embed_tree, EmbeddingConfigIn};
use crate::error::{Error, Result};
use crate::hypgeom::PointConfiguration;
use crate::optimizer::{config_distances, optimize, OptimizerSettings, TraceRecord, Tracer};
use crate::seqmodel::{diff_rates, Alignment, DiffRateMatrix};
use crate::treekit::{midpoint_root, neighbor_joining, optimize_branch_lengths, DistanceMatrix, Tree};

/// Everything produced by one run of the hyperbolic inference pipeline.
#[derive(Debug, Clone)]
pub struct Inference {
    pub stats: DiffRateMatrix,
    /// NJ tree on ML distances with tuned lengths, midpoint rooted.
    pub guide_tree: Tree,
    pub initial: PointConfiguration,
    pub config: PointConfiguration,
    pub distances: DistanceMatrix,
    pub tree: Tree,
    pub trace: Vec<TraceRecord>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Difference rates, then NJ on ML distances, branch-length tuning and
/// midpoint rooting for the guide tree, then embedding, optimization and NJ
/// on the learned distances.
pub fn infer(
    a: &Alignment,
    rho: f64,
    m: usize,
    settings: &OptimizerSettings,
    seed: u64,
    tracer: Option<&mut Tracer<'_>>,
) -> Result<Inference> {
    if a.n_taxa() < 3 {
        return Err(Error::domain(format!("inference needs >= 3 taxa, got {}", a.n_taxa())));
    }
    let stats = diff_rates(a);
    let nj = neighbor_joining(&stats.ml_distances())?;
    let (tuned, _) = optimize_branch_lengths(&nj, a)?;
    let guide_tree = midpoint_root(&tuned);
    let initial = embed_tree(&EmbeddingConfigIn {
        tree: guide_tree.clone(),
        m,
        rho,
        seed,
    })?;
    let out = optimize(&initial, &stats, settings, tracer)?;
    let distances = config_distances(&out.config);
    let tree = neighbor_joining(&distances)?;
    Ok(Inference {
        stats,
        guide_tree,
        initial,
        config: out.config,
        distances,
        tree,
        trace: out.trace,
        sweeps: out.sweeps,
        converged: out.converged,
    })
}

/// The NJ baseline: neighbor joining on ML pairwise distances.
pub fn infer_nj(a: &Alignment) -> Result<Tree> {
    neighbor_joining(&diff_rates(a).ml_distances())
}
