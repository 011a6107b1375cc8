//! Phylogenetic inference by maximizing a pairwise likelihood over point
//! configurations in hyperbolic space.

pub mod cli;
pub mod embedder;
pub mod error;
pub mod hypgeom;
pub mod optimizer;
pub mod rng;
pub mod seqmodel;
pub mod treekit;

pub use error::{Error, Result};
