use super::tree::Adjacency;
use super::{DistanceMatrix, Tree};
use crate::error::{Error, Result};

/// Neighbor joining with the Q-criterion. Ties go to the lexicographically
/// smallest pair of current cluster indices; negative branch lengths are
/// clamped to 0. The result is unrooted and anchored at a degree-3 node.
pub fn neighbor_joining(d: &DistanceMatrix) -> Result<Tree> {
    let n = d.len();
    if n < 3 {
        return Err(Error::domain(format!("neighbor joining needs >= 3 taxa, got {n}")));
    }
    // nodes 0..n are leaves, internal nodes are appended as they are created
    let mut adj: Adjacency = vec![Vec::new(); n];
    let mut labels: Vec<Option<String>> = d.labels().iter().cloned().map(Some).collect();
    let mut dist = d.rows();
    // active[k] is the node id of cluster k; dist is indexed by cluster
    let mut active: Vec<usize> = (0..n).collect();

    while active.len() > 3 {
        let k = active.len();
        let sums: Vec<f64> = dist.iter().map(|row| row.iter().sum()).collect();
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..k {
            for j in (i + 1)..k {
                let q = (k as f64 - 2.0) * dist[i][j] - sums[i] - sums[j];
                if q < best.0 {
                    best = (q, i, j);
                }
            }
        }
        let (_, i, j) = best;
        let dij = dist[i][j];
        let li = 0.5 * dij + (sums[i] - sums[j]) / (2.0 * (k as f64 - 2.0));
        let lj = dij - li;
        let u = adj.len();
        adj.push(Vec::new());
        labels.push(None);
        link(&mut adj, u, active[i], li);
        link(&mut adj, u, active[j], lj);

        let new_row: Vec<f64> = (0..k)
            .map(|m| 0.5 * (dist[i][m] + dist[j][m] - dij))
            .collect();
        // cluster i becomes u, cluster j is removed
        for m in 0..k {
            dist[i][m] = new_row[m];
            dist[m][i] = new_row[m];
        }
        dist[i][i] = 0.0;
        dist.remove(j);
        for row in &mut dist {
            row.remove(j);
        }
        active[i] = u;
        active.remove(j);
    }

    let (a, b, c) = (active[0], active[1], active[2]);
    let (dab, dac, dbc) = (dist[0][1], dist[0][2], dist[1][2]);
    let center = adj.len();
    adj.push(Vec::new());
    labels.push(None);
    link(&mut adj, center, a, 0.5 * (dab + dac - dbc));
    link(&mut adj, center, b, 0.5 * (dab + dbc - dac));
    link(&mut adj, center, c, 0.5 * (dac + dbc - dab));

    let mut t = Tree::from_adjacency(&adj, &labels, center, false);
    t.canonicalize();
    Ok(t)
}

fn link(adj: &mut Adjacency, a: usize, b: usize, len: f64) {
    let len = len.max(0.0);
    adj[a].push((b, len));
    adj[b].push((a, len));
}
