//! The full inference pipeline on a simulated alignment, printing the
//! optimization trace against the generating tree.
//!
//! cargo run --release --example infer -- [leaves] [length] [seed]

use hyptree::cli::infer;
use hyptree::optimizer::{OptimizerSettings, Tracer};
use hyptree::seqmodel::simulate_alignment;
use hyptree::treekit::{random_topology, rf_distance, sample_edge_lengths, write_newick};

fn main() -> hyptree::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(15) as usize;
    let length = args.get(1).copied().unwrap_or(400) as usize;
    let seed = args.get(2).copied().unwrap_or(0);

    let truth = sample_edge_lengths(&random_topology(n, seed)?, 0.05, 0.2, seed + 1)?;
    let a = simulate_alignment(&truth, length, seed + 2)?;
    let settings = OptimizerSettings { trace_every: 100, ..Default::default() };
    let mut tracer = Tracer { reference: Some(&truth), alignment: Some(&a), ..Default::default() };
    let r = infer(&a, 0.5, 10, &settings, seed, Some(&mut tracer))?;

    println!("{:>6} {:>14} {:>10} {:>4} {:>14}", "sweep", "objective", "max step", "RF", "tree loglik");
    for rec in &r.trace {
        println!(
            "{:>6} {:>14.6} {:>10.2e} {:>4} {:>14.4}",
            rec.iteration,
            rec.objective,
            rec.max_step_taken,
            rec.rf.unwrap_or(0),
            rec.tree_loglik.unwrap_or(f64::NAN)
        );
    }
    println!("converged: {} after {} sweeps", r.converged, r.sweeps);
    println!("guide tree RF {}, final RF {}", rf_distance(&r.guide_tree, &truth)?, rf_distance(&r.tree, &truth)?);
    println!("{}", write_newick(&r.tree));
    Ok(())
}
