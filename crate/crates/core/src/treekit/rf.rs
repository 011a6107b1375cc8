use std::collections::{HashMap, HashSet};

use super::Tree;
use crate::error::{Error, Result};

/// Non-trivial bipartitions of `t` as bitsets over `labels`, each
/// normalized to the side that excludes `labels[0]`.
pub fn splits(t: &Tree, labels: &[String]) -> HashSet<Vec<u64>> {
    let n = labels.len();
    let words = n.div_ceil(64);
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut below: Vec<Vec<u64>> = vec![vec![0; words]; t.nodes().len()];
    let mut count = vec![0usize; t.nodes().len()];
    let mut out = HashSet::new();
    for v in t.postorder() {
        let node = t.node(v);
        if node.is_leaf() {
            if let Some(&i) = node.label().and_then(|l| index.get(l)) {
                below[v][i / 64] |= 1 << (i % 64);
                count[v] = 1;
            }
        } else {
            for &c in node.children() {
                let (head, tail) = if c < v {
                    let (a, b) = below.split_at_mut(v);
                    (&mut b[0], &a[c])
                } else {
                    let (a, b) = below.split_at_mut(c);
                    (&mut a[v], &b[0])
                };
                for (x, y) in head.iter_mut().zip(tail) {
                    *x |= y;
                }
                count[v] += count[c];
            }
        }
        if v != t.root() && count[v] >= 2 && n - count[v] >= 2 {
            let mut bits = below[v].clone();
            if bits[0] & 1 == 1 {
                for (k, w) in bits.iter_mut().enumerate() {
                    *w = !*w;
                    let valid = n - 64 * k;
                    if valid < 64 {
                        *w &= (1u64 << valid) - 1;
                    }
                }
            }
            out.insert(bits);
        }
    }
    out
}

/// Robinson-Foulds distance: the number of non-trivial bipartitions found
/// in exactly one of the two trees.
pub fn rf_distance(t1: &Tree, t2: &Tree) -> Result<usize> {
    let l1 = t1.leaf_labels();
    let l2 = t2.leaf_labels();
    if l1 != l2 {
        return Err(Error::domain("trees have different leaf label sets"));
    }
    let s1 = splits(t1, &l1);
    let s2 = splits(t2, &l1);
    Ok(s1.symmetric_difference(&s2).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treekit::{parse_newick, random_topology};
    use proptest::prelude::*;

    #[test]
    fn identical_and_rooting_invariant() {
        let t = parse_newick("((A,B),(C,D));").unwrap();
        assert_eq!(rf_distance(&t, &t).unwrap(), 0);
        let u = parse_newick("(A,B,(C,D));").unwrap();
        assert_eq!(rf_distance(&t, &u).unwrap(), 0);
    }

    #[test]
    fn distinct_quartets() {
        let a = parse_newick("((A,B),(C,D));").unwrap();
        let b = parse_newick("((A,C),(B,D));").unwrap();
        assert_eq!(rf_distance(&a, &b).unwrap(), 2);
    }

    #[test]
    fn maximum_for_disjoint_splits() {
        let a = parse_newick("(((((A,B),C),D),E),F);").unwrap();
        let b = parse_newick("(((((A,C),E),B),F),D);").unwrap();
        assert_eq!(rf_distance(&a, &b).unwrap(), 2 * (6 - 3));
    }

    #[test]
    fn label_mismatch() {
        let a = parse_newick("((A,B),(C,D));").unwrap();
        let b = parse_newick("((A,B),(C,E));").unwrap();
        assert!(matches!(rf_distance(&a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn many_leaves_span_words() {
        let t = random_topology(150, 3).unwrap();
        assert_eq!(splits(&t, &t.leaf_labels()).len(), 150 - 3);
        assert_eq!(rf_distance(&t, &t).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn rf_is_a_metric(n in 4usize..16, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
            let (a, b, c) = (
                random_topology(n, s1).unwrap(),
                random_topology(n, s2).unwrap(),
                random_topology(n, s3).unwrap(),
            );
            let ab = rf_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, rf_distance(&b, &a).unwrap());
            prop_assert!(rf_distance(&a, &c).unwrap() <= ab + rf_distance(&b, &c).unwrap());
            prop_assert!(ab <= 2 * (n - 3));
            let same = splits(&a, &a.leaf_labels()) == splits(&b, &a.leaf_labels());
            prop_assert_eq!(ab == 0, same);
        }
    }
}
