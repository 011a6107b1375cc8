//! Draw a random tree, evolve Jukes-Cantor sequences on it and compare the
//! maximum-likelihood pairwise distances with the true path lengths.
//!
//! cargo run --example simulate -- [leaves] [length] [seed]

use hyptree::seqmodel::{diff_rates, simulate_alignment, tree_loglik};
use hyptree::treekit::{leaf_distances, random_topology, sample_edge_lengths, write_newick};

fn main() -> hyptree::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(8) as usize;
    let length = args.get(1).copied().unwrap_or(2000) as usize;
    let seed = args.get(2).copied().unwrap_or(1);

    let tree = sample_edge_lengths(&random_topology(n, seed)?, 0.05, 0.2, seed + 1)?;
    println!("{}", write_newick(&tree));
    let a = simulate_alignment(&tree, length, seed + 2)?;
    for i in 0..a.n_taxa().min(4) {
        println!(">{} {}...", a.taxa()[i], &a.sequence(i)[..40.min(length)]);
    }
    println!("log-likelihood of the generating tree: {:.4}", tree_loglik(&tree, &a)?);

    let truth = leaf_distances(&tree);
    let ml = diff_rates(&a).ml_distances();
    let worst = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (ml.get(i, j) - truth.get(i, j)).abs())
        .fold(0.0, f64::max);
    println!("largest |ML distance - path length| over all pairs: {worst:.4}");
    Ok(())
}
