//! Felsenstein pruning under Jukes-Cantor with site-pattern compression.

use std::collections::HashMap;

use super::alignment::{base_index, Alignment};
use super::jc::{p_diff, p_same};
use crate::error::{Error, Result};
use crate::treekit::Tree;

type Partial = [f64; 4];

/// Applies the JC transition matrix of length `t` to a partial vector.
#[inline]
fn transition(t: f64, v: &Partial) -> Partial {
    let (ps, pd) = (p_same(t), p_diff(t));
    let s = v[0] + v[1] + v[2] + v[3];
    let diag = ps - pd;
    [diag * v[0] + pd * s, diag * v[1] + pd * s, diag * v[2] + pd * s, diag * v[3] + pd * s]
}

/// Rescales `v` so its largest entry is 1 and returns the log of the factor.
#[inline]
fn rescale(v: &mut Partial) -> f64 {
    let m = v.iter().copied().fold(0.0, f64::max);
    if m > 0.0 && m != 1.0 {
        for x in v.iter_mut() {
            *x /= m;
        }
        m.ln()
    } else if m > 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Pruning state for one tree and one alignment. Node ids are the tree's;
/// lengths live in `lengths` so edges can be changed in place.
pub(crate) struct Pruner {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
    root: usize,
    pub(crate) lengths: Vec<f64>,
    weights: Vec<f64>,
    n_pat: usize,
    down: Vec<Partial>,
    down_scale: Vec<f64>,
    msg: Vec<Partial>,
    up: Vec<Partial>,
    up_scale: Vec<f64>,
}

impl Pruner {
    pub(crate) fn new(tree: &Tree, a: &Alignment) -> Result<Self> {
        let leaves = tree.leaves();
        let mut row_of = Vec::with_capacity(leaves.len());
        for &v in &leaves {
            let label = tree.node(v).label().unwrap_or_default();
            row_of.push(a.index_of(label).ok_or_else(|| {
                Error::domain(format!("tree leaf {label:?} is missing from the alignment"))
            })?);
        }
        if leaves.len() != a.n_taxa() {
            return Err(Error::domain(format!(
                "tree has {} leaves but the alignment has {} taxa",
                leaves.len(),
                a.n_taxa()
            )));
        }

        // compress columns into patterns, in order of first appearance
        let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut patterns: Vec<Vec<u8>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let rows: Vec<&[u8]> = row_of.iter().map(|&r| a.bytes(r)).collect();
        for s in 0..a.length() {
            let col: Vec<u8> = rows
                .iter()
                .map(|r| base_index(r[s]).expect("alignment bases are validated"))
                .collect();
            match index.get(&col) {
                Some(&k) => weights[k] += 1.0,
                None => {
                    index.insert(col.clone(), patterns.len());
                    patterns.push(col);
                    weights.push(1.0);
                }
            }
        }

        let n_nodes = tree.nodes().len();
        let n_pat = patterns.len();
        let mut down = vec![[0.0; 4]; n_nodes * n_pat];
        for (li, &v) in leaves.iter().enumerate() {
            for (k, col) in patterns.iter().enumerate() {
                down[v * n_pat + k][col[li] as usize] = 1.0;
            }
        }
        let mut p = Pruner {
            parent: tree.nodes().iter().map(|n| n.parent()).collect(),
            children: tree.nodes().iter().map(|n| n.children().to_vec()).collect(),
            preorder: tree.preorder(),
            root: tree.root(),
            lengths: tree.nodes().iter().map(|n| n.length()).collect(),
            weights,
            n_pat,
            down,
            down_scale: vec![0.0; n_nodes * n_pat],
            msg: vec![[0.0; 4]; n_nodes * n_pat],
            up: vec![[0.0; 4]; n_nodes * n_pat],
            up_scale: vec![0.0; n_nodes * n_pat],
        };
        p.refresh();
        Ok(p)
    }

    /// Recomputes all partials from the current lengths.
    pub(crate) fn refresh(&mut self) {
        let np = self.n_pat;
        for &v in self.preorder.iter().rev() {
            if !self.children[v].is_empty() {
                for k in 0..np {
                    let mut acc = [1.0; 4];
                    let mut scale = 0.0;
                    for &c in &self.children[v] {
                        let m = &self.msg[c * np + k];
                        for a in 0..4 {
                            acc[a] *= m[a];
                        }
                        scale += self.down_scale[c * np + k];
                    }
                    scale += rescale(&mut acc);
                    self.down[v * np + k] = acc;
                    self.down_scale[v * np + k] = scale;
                }
            }
            if v != self.root {
                let t = self.lengths[v];
                for k in 0..np {
                    self.msg[v * np + k] = transition(t, &self.down[v * np + k]);
                }
            }
        }
        for i in 0..self.preorder.len() {
            let p = self.preorder[i];
            for ci in 0..self.children[p].len() {
                let c = self.children[p][ci];
                for k in 0..np {
                    let (mut acc, mut scale) = match self.parent[p] {
                        None => ([0.25; 4], 0.0),
                        Some(_) => (
                            transition(self.lengths[p], &self.up[p * np + k]),
                            self.up_scale[p * np + k],
                        ),
                    };
                    for &s in &self.children[p] {
                        if s != c {
                            let m = &self.msg[s * np + k];
                            for a in 0..4 {
                                acc[a] *= m[a];
                            }
                            scale += self.down_scale[s * np + k];
                        }
                    }
                    scale += rescale(&mut acc);
                    self.up[c * np + k] = acc;
                    self.up_scale[c * np + k] = scale;
                }
            }
        }
    }

    /// Total log-likelihood including the uniform root distribution.
    pub(crate) fn loglik(&self) -> f64 {
        let np = self.n_pat;
        (0..np)
            .map(|k| {
                let v = &self.down[self.root * np + k];
                let s = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                self.weights[k] * (s.ln() + self.down_scale[self.root * np + k])
            })
            .sum()
    }

    /// Per-pattern sufficient statistics `(A, B, log scale)` for the edge
    /// above `v`: the likelihood at length t is `p_same(t) A + p_diff(t) B`.
    pub(crate) fn edge_stats(&self, v: usize) -> Vec<(f64, f64, f64)> {
        let np = self.n_pat;
        (0..np)
            .map(|k| {
                let (u, d) = (&self.up[v * np + k], &self.down[v * np + k]);
                let a: f64 = (0..4).map(|i| u[i] * d[i]).sum();
                let b = u.iter().sum::<f64>() * d.iter().sum::<f64>() - a;
                (a, b.max(0.0), self.up_scale[v * np + k] + self.down_scale[v * np + k])
            })
            .collect()
    }

    pub(crate) fn edge_loglik(&self, stats: &[(f64, f64, f64)], t: f64) -> f64 {
        let (ps, pd) = (p_same(t), p_diff(t));
        stats
            .iter()
            .zip(&self.weights)
            .map(|(&(a, b, s), &w)| w * ((ps * a + pd * b).ln() + s))
            .sum()
    }

    pub(crate) fn edges(&self) -> Vec<usize> {
        self.preorder.iter().copied().filter(|&v| v != self.root).collect()
    }
}

/// Full Jukes-Cantor log-likelihood of `a` on `tree` (uniform root
/// distribution, sites independent).
pub fn tree_loglik(tree: &Tree, a: &Alignment) -> Result<f64> {
    Ok(Pruner::new(tree, a)?.loglik())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::{diff_rates, pairwise_loglik, simulate_alignment};
    use crate::treekit::{midpoint_root, parse_newick, random_topology, sample_edge_lengths};

    fn aln(pairs: &[(&str, &str)]) -> Alignment {
        Alignment::new(
            pairs.iter().map(|p| p.0.to_string()).collect(),
            pairs.iter().map(|p| p.1.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_leaf_closed_form() {
        let a = aln(&[("x", "ACGTACGTAA"), ("y", "ACGTACGTCG")]);
        let t = parse_newick("(x:0.1,y:0.25);").unwrap();
        let r = diff_rates(&a).rate(0, 1);
        let expected = pairwise_loglik(r, 10, 0.35).unwrap() + 10.0 * 0.25f64.ln();
        let got = tree_loglik(&t, &a).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs(), "{got} vs {expected}");
    }

    #[test]
    fn three_leaf_star_brute_force() {
        let a = aln(&[("a", "A"), ("b", "C"), ("c", "A")]);
        let (ta, tb, tc) = (0.1, 0.3, 0.7);
        let t = parse_newick(&format!("(a:{ta},b:{tb},c:{tc});")).unwrap();
        let p = |t: f64, x: usize, y: usize| if x == y { p_same(t) } else { p_diff(t) };
        let mut total = 0.0;
        for z in 0..4 {
            total += 0.25 * p(ta, z, 0) * p(tb, z, 1) * p(tc, z, 0);
        }
        let got = tree_loglik(&t, &a).unwrap();
        assert!((got - total.ln()).abs() < 1e-13);
    }

    #[test]
    fn label_mismatch() {
        let a = aln(&[("a", "A"), ("b", "C"), ("d", "A")]);
        let t = parse_newick("(a:1,b:1,c:1);").unwrap();
        assert!(matches!(tree_loglik(&t, &a), Err(Error::Domain(_))));
        let a = aln(&[("a", "A"), ("b", "C")]);
        assert!(matches!(tree_loglik(&t, &a), Err(Error::Domain(_))));
    }

    #[test]
    fn rerooting_invariance() {
        let t = sample_edge_lengths(&random_topology(8, 4).unwrap(), 0.05, 0.2, 5).unwrap();
        let a = simulate_alignment(&midpoint_root(&t), 300, 6).unwrap();
        let base = tree_loglik(&t, &a).unwrap();
        let rooted = tree_loglik(&midpoint_root(&t), &a).unwrap();
        assert!((base - rooted).abs() < 1e-9 * base.abs());
    }

    #[test]
    fn edge_function_matches_total() {
        let t = sample_edge_lengths(&random_topology(7, 1).unwrap(), 0.05, 0.2, 2).unwrap();
        let a = simulate_alignment(&midpoint_root(&t), 500, 3).unwrap();
        let p = Pruner::new(&t, &a).unwrap();
        let total = p.loglik();
        for v in p.edges() {
            let stats = p.edge_stats(v);
            let e = p.edge_loglik(&stats, p.lengths[v]);
            assert!((e - total).abs() < 1e-9 * total.abs(), "edge {v}: {e} vs {total}");
        }
    }

    #[test]
    fn deep_trees_do_not_underflow() {
        let t = sample_edge_lengths(&random_topology(200, 1).unwrap(), 0.05, 0.2, 2).unwrap();
        let a = simulate_alignment(&midpoint_root(&t), 50, 3).unwrap();
        assert!(tree_loglik(&t, &a).unwrap().is_finite());
    }
}
