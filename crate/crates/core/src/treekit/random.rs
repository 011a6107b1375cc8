use rand::seq::SliceRandom;
use rand::Rng;

use super::Tree;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Edge lengths are drawn on this dyadic grid, so path sums over the
/// sampled lengths are exact in f64 and tree metrics satisfy the four-point
/// condition bit-for-bit.
pub const LENGTH_GRID: f64 = 1.0 / (1u64 << 24) as f64;

/// Leaf labels `t1..tn`, zero-padded so lexicographic and numeric order agree.
pub fn leaf_label(i: usize, n: usize) -> String {
    let width = n.to_string().len();
    format!("t{:0width$}", i + 1)
}

/// Unrooted binary topology grown by a pure-birth (Yule) process: starting
/// from a cherry, a uniformly chosen lineage splits until there are `n`
/// leaves; labels are then shuffled onto the leaves and the root suppressed.
/// All edge lengths are 0.
pub fn random_topology(n_leaves: usize, seed: u64) -> Result<Tree> {
    if n_leaves < 3 {
        return Err(Error::domain(format!("random topology needs >= 3 leaves, got {n_leaves}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut tree = Tree::with_root(None);
    let mut lineages = vec![tree.add_child(0, None, 0.0), tree.add_child(0, None, 0.0)];
    while lineages.len() < n_leaves {
        let k = rng.random_range(0..lineages.len());
        let v = lineages.swap_remove(k);
        lineages.push(tree.add_child(v, None, 0.0));
        lineages.push(tree.add_child(v, None, 0.0));
    }
    let mut labels: Vec<String> = (0..n_leaves).map(|i| leaf_label(i, n_leaves)).collect();
    labels.shuffle(&mut rng);
    lineages.sort_unstable();
    for (v, l) in lineages.into_iter().zip(labels) {
        tree.nodes_mut()[v].label = Some(l);
    }
    let mut t = tree.unrooted();
    t.canonicalize();
    Ok(t)
}

/// Draws every edge length i.i.d. uniformly from `[lo, hi]` (on the grid
/// [`LENGTH_GRID`]; exactly `lo` when `lo == hi`).
pub fn sample_edge_lengths(t: &Tree, lo: f64, hi: f64, seed: u64) -> Result<Tree> {
    if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::domain(format!("invalid length interval [{lo}, {hi}]")));
    }
    let mut rng = rng_from_seed(seed);
    let mut out = t.clone();
    for e in t.edges() {
        let len = if lo == hi {
            lo
        } else {
            let u = lo + (hi - lo) * rng.random::<f64>();
            let q = (u / LENGTH_GRID).round() * LENGTH_GRID;
            if q < lo {
                ((lo / LENGTH_GRID).ceil() * LENGTH_GRID).min(hi)
            } else if q > hi {
                ((hi / LENGTH_GRID).floor() * LENGTH_GRID).max(lo)
            } else {
                q
            }
        };
        out.set_length(e, len);
    }
    Ok(out)
}
