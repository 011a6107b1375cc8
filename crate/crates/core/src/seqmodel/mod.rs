//! Jukes-Cantor substitution model, alignments, simulation and likelihoods.

mod alignment;
mod jc;
pub(crate) mod likelihood;
mod simulate;

pub use alignment::{diff_rates, Alignment, DiffRateMatrix};
pub(crate) use jc::{per_site_loglik, per_site_loglik_slope};
pub use jc::{jc_p_diff, jc_p_same, ml_pairwise_distance, pairwise_loglik, T_MAX};
pub use likelihood::tree_loglik;
pub use simulate::simulate_alignment;
