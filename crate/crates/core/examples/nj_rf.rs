//! Neighbor joining, Robinson-Foulds distance, midpoint rooting and
//! branch-length tuning on a simulated data set.
//!
//! cargo run --example nj_rf

use hyptree::seqmodel::{diff_rates, simulate_alignment, tree_loglik};
use hyptree::treekit::{
    leaf_distances, midpoint_root, neighbor_joining, optimize_branch_lengths, parse_newick, rf_distance, write_newick,
};

fn main() -> hyptree::Result<()> {
    let truth = parse_newick("((((A:0.1,B:0.2):0.05,C:0.15):0.1,(D:0.1,E:0.12):0.08):0.02,(F:0.2,(G:0.07,H:0.1):0.1):0.05);")?;

    // Exact path lengths are additive, so NJ recovers the tree.
    let exact = neighbor_joining(&leaf_distances(&truth))?;
    println!("NJ on path lengths:  RF {} -> {}", rf_distance(&exact, &truth)?, write_newick(&midpoint_root(&exact)));

    for length in [100, 1000, 10000] {
        let a = simulate_alignment(&truth, length, 7)?;
        let nj = neighbor_joining(&diff_rates(&a).ml_distances())?;
        let (_, ll) = optimize_branch_lengths(&nj, &a)?;
        println!(
            "L = {length:>5}: RF {}, NJ lengths loglik {:.3}, tuned {ll:.3}, generating {:.3}",
            rf_distance(&nj, &truth)?,
            tree_loglik(&nj, &a)?,
            tree_loglik(&truth, &a)?
        );
    }
    Ok(())
}
