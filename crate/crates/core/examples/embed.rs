//! Embed a tree in the hyperbolic plane and print Poincaré-disc coordinates
//! together with the distortion of every leaf distance.
//!
//! cargo run --example embed -- [rho]

use hyptree::embedder::{embed_tree, EmbeddingConfigIn};
use hyptree::hypgeom::to_poincare;
use hyptree::optimizer::config_distances;
use hyptree::treekit::{leaf_distances, Tree};

fn main() -> hyptree::Result<()> {
    let rho: f64 = std::env::args().nth(1).map(|s| s.parse().expect("rho")).unwrap_or(1.0);
    let tree = Tree::balanced(3, 0.25);
    let config = embed_tree(&EmbeddingConfigIn { tree: tree.clone(), m: 2, rho, seed: 0 })?;
    for (label, p) in config.labels().iter().zip(config.points()) {
        let y = to_poincare(p);
        println!("{label:>4}  ({:+.4}, {:+.4})", y.coords()[0], y.coords()[1]);
    }
    let (emb, truth) = (config_distances(&config), leaf_distances(&tree));
    let n = config.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(truth.get(i, j) - emb.get(i, j));
        }
    }
    println!("rho = {rho}: embedded distances fall short of tree distances by at most {worst:.4}");
    Ok(())
}
