use super::tree::Adjacency;
use super::Tree;

/// Roots `t` at the midpoint of its longest leaf-to-leaf path. Among paths
/// of equal length the lexicographically smallest pair of endpoint labels
/// wins. When the midpoint falls on a node the new root still gets two
/// edges, one of them of length 0.
pub fn midpoint_root(t: &Tree) -> Tree {
    let mut adj = t.adjacency();
    let mut labels = t.labels();
    suppress_degree_two(&mut adj, &labels);

    let mut leaves: Vec<(String, usize)> = (0..adj.len())
        .filter(|&v| adj[v].len() == 1)
        .filter_map(|v| labels[v].clone().map(|l| (l, v)))
        .collect();
    leaves.sort();
    if leaves.len() < 2 {
        return t.clone();
    }

    let mut best: Option<(f64, usize, usize)> = None;
    let mut parent = vec![(usize::MAX, 0.0); adj.len()];
    let mut dist = vec![0.0; adj.len()];
    for (ai, (_, a)) in leaves.iter().enumerate() {
        walk(&adj, *a, &mut dist, &mut parent);
        for (_, b) in &leaves[ai + 1..] {
            if best.is_none_or(|(d, _, _)| dist[*b] > d) {
                best = Some((dist[*b], *a, *b));
            }
        }
    }
    let (diameter, a, b) = best.expect("at least two leaves");
    walk(&adj, a, &mut dist, &mut parent);

    // walk back from b to a and find the edge holding the midpoint
    let half = 0.5 * diameter;
    let mut v = b;
    while v != a {
        let (u, len) = parent[v];
        if dist[u] <= half {
            let x = (half - dist[u]).min(len);
            let root = adj.len();
            adj.push(vec![(u, x), (v, len - x)]);
            labels.push(None);
            replace_neighbor(&mut adj[u], v, root, x);
            replace_neighbor(&mut adj[v], u, root, len - x);
            let mut out = Tree::from_adjacency(&adj, &labels, root, true);
            out.canonicalize();
            return out;
        }
        v = u;
    }
    unreachable!("midpoint lies on the diameter path")
}

fn walk(adj: &Adjacency, src: usize, dist: &mut [f64], parent: &mut [(usize, f64)]) {
    dist[src] = 0.0;
    parent[src] = (usize::MAX, 0.0);
    let mut stack = vec![src];
    while let Some(v) = stack.pop() {
        for &(w, len) in &adj[v] {
            if w != parent[v].0 {
                dist[w] = dist[v] + len;
                parent[w] = (v, len);
                stack.push(w);
            }
        }
    }
}

fn replace_neighbor(list: &mut [(usize, f64)], old: usize, new: usize, len: f64) {
    for e in list.iter_mut() {
        if e.0 == old {
            *e = (new, len);
        }
    }
}

/// Joins the two edges of every unlabelled degree-2 node.
fn suppress_degree_two(adj: &mut Adjacency, labels: &[Option<String>]) {
    for v in 0..adj.len() {
        if adj[v].len() == 2 && labels[v].is_none() {
            let [(p, lp), (q, lq)] = [adj[v][0], adj[v][1]];
            replace_neighbor(&mut adj[p], v, q, lp + lq);
            replace_neighbor(&mut adj[q], v, p, lp + lq);
            adj[v].clear();
        }
    }
}
