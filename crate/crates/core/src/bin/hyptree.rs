use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyptree::cli::{self, EmbedArgs, FourpointArgs, InferArgs, Outcome, SimulateArgs, StudyArgs};

#[derive(Parser)]
#[command(name = "hyptree", version, about = "Hyperbolic phylogenetic inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a random tree and an alignment evolved on it.
    Simulate(SimulateArgs),
    /// Infer a tree from a FASTA alignment.
    Infer(InferArgs),
    /// Embed a Newick tree in hyperbolic space.
    Embed(EmbedArgs),
    /// Four-point delta of a configuration or distance matrix.
    Fourpoint(FourpointArgs),
    /// Run a simulation study.
    Study(StudyArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> hyptree::Result<Outcome> {
    match command {
        Command::Simulate(a) => cli::cmd_simulate(&a),
        Command::Infer(a) => cli::cmd_infer(&a),
        Command::Embed(a) => cli::cmd_embed(&a),
        Command::Fourpoint(a) => cli::cmd_fourpoint(&a).map(|r| Outcome {
            summary: r.summary(),
            warnings: Vec::new(),
            converged: true,
        }),
        Command::Study(a) => cli::cmd_study(&a),
        Command::Replay { manifest, out } => cli::replay(&manifest, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(parsed.command) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.summary);
            if outcome.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
