//! Phylogenetic trees: Newick I/O, leaf metrics, random trees, neighbor
//! joining, midpoint rooting, Robinson-Foulds distance and branch-length
//! tuning.

mod branch_opt;
mod distance;
mod newick;
mod nj;
mod random;
mod rf;
mod rooting;
mod tree;

pub use branch_opt::optimize_branch_lengths;
pub(crate) use distance::{csv_field, split_csv};
pub use distance::{leaf_distances, DistanceMatrix};
pub use newick::{parse_newick, parse_newick_lines, write_newick};
pub use nj::neighbor_joining;
pub use random::{leaf_label, random_topology, sample_edge_lengths, LENGTH_GRID};
pub use rf::{rf_distance, splits};
pub use rooting::midpoint_root;
pub use tree::{Node, Tree};
