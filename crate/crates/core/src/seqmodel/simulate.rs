use rand::Rng;

use super::alignment::Alignment;
use super::jc::p_same;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::treekit::Tree;

/// Evolves `length` independent sites down `tree` under Jukes-Cantor, with
/// uniform states at the anchor node. Taxa come out in ascending label order.
pub fn simulate_alignment(tree: &Tree, length: usize, seed: u64) -> Result<Alignment> {
    if length == 0 {
        return Err(Error::domain("sequence length must be positive"));
    }
    if tree.n_leaves() < 2 {
        return Err(Error::domain("simulation needs at least two leaves"));
    }
    let mut rng = rng_from_seed(seed);
    let mut states: Vec<Vec<u8>> = vec![Vec::new(); tree.nodes().len()];
    for v in tree.preorder() {
        let node = tree.node(v);
        states[v] = match node.parent() {
            None => (0..length).map(|_| rng.random_range(0..4u8)).collect(),
            Some(p) => {
                let keep = p_same(node.length());
                let parent = &states[p];
                let mut out = Vec::with_capacity(length);
                for &s in parent {
                    if rng.random::<f64>() < keep {
                        out.push(s);
                    } else {
                        out.push((s + rng.random_range(1..4u8)) % 4);
                    }
                }
                out
            }
        };
    }
    let labels = tree.leaf_labels();
    let codes = labels
        .iter()
        .map(|l| std::mem::take(&mut states[tree.find_leaf(l).expect("leaf exists")]))
        .collect();
    Ok(Alignment::from_codes(labels, codes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::{diff_rates, jc_p_diff, ml_pairwise_distance};
    use crate::treekit::{parse_newick, Tree};

    #[test]
    fn zero_lengths_give_identical_sequences() {
        let t = Tree::balanced(3, 0.0);
        let a = simulate_alignment(&t, 200, 1).unwrap();
        assert!((1..8).all(|i| a.sequence(i) == a.sequence(0)));
        assert_eq!(a.taxa()[0], "1");
    }

    #[test]
    fn zero_length_is_an_error() {
        let t = parse_newick("(a:1,b:1);").unwrap();
        assert!(matches!(simulate_alignment(&t, 0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn deterministic() {
        let t = Tree::balanced(3, 0.25);
        assert_eq!(simulate_alignment(&t, 100, 9).unwrap(), simulate_alignment(&t, 100, 9).unwrap());
        assert_ne!(simulate_alignment(&t, 100, 9).unwrap(), simulate_alignment(&t, 100, 10).unwrap());
    }

    #[test]
    fn two_leaf_divergence_binomial_bounds() {
        let t_total = 0.3;
        let t = parse_newick(&format!("(a:{},b:{});", 0.1, t_total - 0.1)).unwrap();
        let n = 1_000_000;
        let a = simulate_alignment(&t, n, 42).unwrap();
        let r = diff_rates(&a).rate(0, 1);
        let p = 3.0 * jc_p_diff(t_total).unwrap();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((r - p).abs() < 3.0 * sigma, "r = {r}, expected {p}");
    }

    #[test]
    fn balanced_tree_distances_approach_tree_metric() {
        let a = simulate_alignment(&Tree::balanced(3, 0.25), 200_000, 5).unwrap();
        let r = diff_rates(&a);
        let expected = [0.0, 0.5, 1.0, 1.0, 1.5, 1.5, 1.5, 1.5];
        for (j, &e) in expected.iter().enumerate() {
            assert!((ml_pairwise_distance(r.rate(0, j)) - e).abs() < 0.03, "column {j}");
        }
    }
}
