use super::Tree;
use crate::error::Result;
use crate::seqmodel::likelihood::Pruner;
use crate::seqmodel::{Alignment, T_MAX};

const GOLDEN_TOL: f64 = 1e-6;
const SWEEP_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 1000;

/// Maximizes a unimodal `f` on `[lo, hi]` to within `tol` in the argument.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    // the bracket may have collapsed onto an endpoint
    [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((x1, f1), |best, c| if c.1 > best.1 { c } else { best })
}

/// Coordinate ascent on edge lengths: each edge in turn is set to the
/// maximizer of the full JC likelihood along that edge (golden-section search
/// on `[0, T_MAX]`), until a sweep gains less than `1e-6`. Returns the tuned
/// tree and its log-likelihood.
pub fn optimize_branch_lengths(t: &Tree, a: &Alignment) -> Result<(Tree, f64)> {
    let mut p = Pruner::new(t, a)?;
    let mut current = p.loglik();
    for _ in 0..MAX_SWEEPS {
        let start = current;
        for v in p.edges() {
            let stats = p.edge_stats(v);
            let here = p.edge_loglik(&stats, p.lengths[v]);
            let (x, fx) = golden_section(|x| p.edge_loglik(&stats, x), 0.0, T_MAX, GOLDEN_TOL);
            if fx > here {
                p.lengths[v] = x;
                p.refresh();
                current = p.loglik();
            }
        }
        if !(current - start >= SWEEP_TOL) {
            break;
        }
    }
    let mut out = t.clone();
    for v in out.edges() {
        out.set_length(v, p.lengths[v]);
    }
    Ok((out, current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::{diff_rates, ml_pairwise_distance, simulate_alignment, tree_loglik};
    use crate::treekit::{midpoint_root, parse_newick, random_topology, sample_edge_lengths};

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, _) = golden_section(|x| -(x - 1.3) * (x - 1.3), 0.0, 10.0, 1e-8);
        assert!((x - 1.3).abs() < 1e-7);
        let (x, _) = golden_section(|x| -x, 0.0, 10.0, 1e-8);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn two_leaf_total_is_ml_distance() {
        let t = parse_newick("(a:0.5,b:0.5);").unwrap();
        let a = simulate_alignment(&t, 400, 3).unwrap();
        let (tuned, ll) = optimize_branch_lengths(&t, &a).unwrap();
        let total: f64 = tuned.edges().iter().map(|&e| tuned.node(e).length()).sum();
        let ml = ml_pairwise_distance(diff_rates(&a).rate(0, 1));
        assert!((total - ml).abs() < 1e-5, "{total} vs {ml}");
        assert!((ll - tree_loglik(&tuned, &a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn ascent_and_fixed_point() {
        let gen = sample_edge_lengths(&random_topology(8, 2).unwrap(), 0.05, 0.2, 3).unwrap();
        let a = simulate_alignment(&midpoint_root(&gen), 300, 4).unwrap();
        let before = tree_loglik(&gen, &a).unwrap();
        let (tuned, ll) = optimize_branch_lengths(&gen, &a).unwrap();
        assert!(ll >= before);
        assert!((ll - tree_loglik(&tuned, &a).unwrap()).abs() < 1e-8);
        let (_, again) = optimize_branch_lengths(&tuned, &a).unwrap();
        assert!(again >= ll && again - ll < 1e-6);
    }

    #[test]
    fn identical_sequences_collapse_lengths() {
        let t = parse_newick("(a:0.3,b:0.3,c:0.3);").unwrap();
        let a = Alignment::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["ACGT".into(), "ACGT".into(), "ACGT".into()],
        )
        .unwrap();
        let (tuned, _) = optimize_branch_lengths(&t, &a).unwrap();
        assert!(tuned.edges().iter().all(|&e| tuned.node(e).length() < 1e-5));
    }
}
