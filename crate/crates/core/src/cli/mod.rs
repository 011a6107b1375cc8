//! Command layer: file-based entry points for simulation, inference,
//! embedding, four-point diagnostics and simulation studies. Every command
//! that writes files also writes a `manifest.json` from which it can be
//! replayed.

pub mod files;
mod pipeline;
mod study;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::embedder::{embed_tree, EmbeddingConfigIn};
use crate::error::{Error, Result};
use crate::hypgeom::{max_quadruple_delta, sampled_delta};
use crate::optimizer::{OptimizerSettings, Tracer};
use crate::rng::derive_seed;
use crate::seqmodel::{simulate_alignment, Alignment};
use crate::treekit::{midpoint_root, parse_newick, random_topology, sample_edge_lengths, write_newick, DistanceMatrix};
use files::{configuration_from_csv, configuration_to_csv, poincare_to_csv, read_text, write_text};

pub use pipeline::{infer, infer_nj, Inference};
pub use study::{cmd_study, read_study_csv, study_to_csv, StudyArgs, StudyKind, StudyRecord, STUDY_FILE};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Optimizer flags shared by `infer` and `study`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OptimizerFlags {
    #[arg(long = "lr", default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    pub max_step: f64,
    #[arg(long = "conv-threshold", default_value_t = 5e-5)]
    pub convergence_threshold: f64,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 10)]
    pub trace_every: usize,
    /// Jacobi-style sweeps with parallel gradients (not bit-reproducible
    /// against the default sequential sweeps).
    #[arg(long)]
    pub parallel: bool,
}

impl Default for OptimizerFlags {
    fn default() -> Self {
        OptimizerSettings::default().into()
    }
}

impl From<OptimizerSettings> for OptimizerFlags {
    fn from(s: OptimizerSettings) -> Self {
        OptimizerFlags {
            learning_rate: s.learning_rate,
            max_step: s.max_step,
            convergence_threshold: s.convergence_threshold,
            max_iterations: s.max_iterations,
            trace_every: s.trace_every,
            parallel: s.parallel,
        }
    }
}

impl OptimizerFlags {
    pub fn settings(&self) -> OptimizerSettings {
        OptimizerSettings {
            learning_rate: self.learning_rate,
            max_step: self.max_step,
            convergence_threshold: self.convergence_threshold,
            max_iterations: self.max_iterations,
            trace_every: self.trace_every,
            parallel: self.parallel,
        }
    }
}

/// Record of one command invocation, sufficient to re-run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub rho: Option<f64>,
    pub m: Option<usize>,
    pub settings: Option<OptimizerSettings>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// The full argument set of the command.
    pub args: serde_json::Value,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    fn new(command: &str, seed: u64, args: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            command: command.into(),
            seed,
            rho: None,
            m: None,
            settings: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            args: serde_json::to_value(args)?,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(MANIFEST_FILE), &(serde_json::to_string_pretty(self)? + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&read_text(path)?)?)
    }
}

/// What a command reports back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub warnings: Vec<String>,
    /// False when an optimizer run hit its iteration limit.
    pub converged: bool,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome {
            summary,
            warnings: Vec::new(),
            converged: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long = "leaves")]
    pub n_leaves: usize,
    #[arg(long)]
    pub length: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.2)]
    pub hi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Draws a random tree and evolves an alignment on it. Writes `tree.nwk`,
/// `alignment.fasta` and the manifest.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    if args.length == 0 {
        return Err(Error::domain("sequence length must be positive"));
    }
    let topology = random_topology(args.n_leaves, derive_seed(args.seed, &[0]))?;
    let tree = sample_edge_lengths(&topology, args.lo, args.hi, derive_seed(args.seed, &[1]))?;
    let a = simulate_alignment(&tree, args.length, derive_seed(args.seed, &[2]))?;
    let tree_path = args.out.join("tree.nwk");
    let aln_path = args.out.join("alignment.fasta");
    write_text(&tree_path, &(write_newick(&tree) + "\n"))?;
    write_text(&aln_path, &a.to_fasta())?;
    let mut manifest = RunManifest::new("simulate", args.seed, args)?;
    manifest.outputs = vec![tree_path, aln_path];
    manifest.write(&args.out)?;
    Ok(Outcome::ok(format!(
        "simulated {} taxa x {} sites into {}",
        args.n_leaves,
        args.length,
        args.out.display()
    )))
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct InferArgs {
    /// FASTA alignment.
    pub alignment: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long = "dim", default_value_t = 30)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub optimizer: OptimizerFlags,
    /// Reference tree (Newick) scored against the inferred topology in the trace.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs the hyperbolic inference pipeline. Writes `tree.nwk`,
/// `distances.csv`, `trace.jsonl`, `config.csv` and the manifest; outputs
/// are written even when the optimizer does not converge.
pub fn cmd_infer(args: &InferArgs) -> Result<Outcome> {
    let a = Alignment::from_fasta(&read_text(&args.alignment)?)?;
    let reference = match &args.reference {
        Some(p) => Some(parse_newick(read_text(p)?.trim())?),
        None => None,
    };
    let settings = args.optimizer.settings();
    settings.validate()?;
    let mut trace_buf: Vec<u8> = Vec::new();
    let result = {
        let mut tracer = Tracer {
            reference: reference.as_ref(),
            alignment: None,
            sink: Some(&mut trace_buf),
        };
        infer(&a, args.rho, args.m, &settings, args.seed, Some(&mut tracer))?
    };
    let saturated = result.stats.saturated_pairs();
    let warnings: Vec<String> = saturated
        .iter()
        .map(|(x, y)| format!("taxa {x} and {y} differ at >= 3/4 of sites; distance capped"))
        .collect();

    let out = &args.out;
    let paths = [
        out.join("tree.nwk"),
        out.join("distances.csv"),
        out.join("trace.jsonl"),
        out.join("config.csv"),
    ];
    write_text(&paths[0], &(write_newick(&result.tree) + "\n"))?;
    write_text(&paths[1], &result.distances.to_csv())?;
    write_text(&paths[2], std::str::from_utf8(&trace_buf).expect("JSON is UTF-8"))?;
    write_text(&paths[3], &configuration_to_csv(&result.config))?;
    let mut manifest = RunManifest::new("infer", args.seed, args)?;
    manifest.rho = Some(args.rho);
    manifest.m = Some(args.m);
    manifest.settings = Some(settings);
    manifest.inputs = std::iter::once(args.alignment.clone()).chain(args.reference.clone()).collect();
    manifest.outputs = paths.to_vec();
    manifest.write(out)?;

    let mut summary = format!(
        "{} after {} sweeps; objective {:.6}",
        if result.converged { "converged" } else { "did not converge" },
        result.sweeps,
        result.trace.last().map(|r| r.objective).unwrap_or(f64::NAN)
    );
    if let Some(rf) = result.trace.last().and_then(|r| r.rf) {
        let _ = write!(summary, "; RF to reference {rf}");
    }
    Ok(Outcome {
        summary,
        warnings,
        converged: result.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Newick tree; unrooted trees are midpoint rooted first.
    pub tree: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long = "dim", default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Embeds a tree. Writes `config.csv`, plus `poincare.csv` when `m = 2`.
pub fn cmd_embed(args: &EmbedArgs) -> Result<Outcome> {
    let mut tree = parse_newick(read_text(&args.tree)?.trim())?;
    if !tree.is_rooted() {
        tree = midpoint_root(&tree);
    }
    let config = embed_tree(&EmbeddingConfigIn {
        tree,
        m: args.m,
        rho: args.rho,
        seed: args.seed,
    })?;
    let mut outputs = vec![args.out.join("config.csv")];
    write_text(&outputs[0], &configuration_to_csv(&config))?;
    if args.m == 2 {
        outputs.push(args.out.join("poincare.csv"));
        write_text(&outputs[1], &poincare_to_csv(&config))?;
    }
    let mut manifest = RunManifest::new("embed", args.seed, args)?;
    manifest.rho = Some(args.rho);
    manifest.m = Some(args.m);
    manifest.inputs = vec![args.tree.clone()];
    manifest.outputs = outputs;
    manifest.write(&args.out)?;
    Ok(Outcome::ok(format!("embedded {} leaves", config.len())))
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FourpointArgs {
    /// Configuration CSV (`label,x1,...`) or distance-matrix CSV (empty corner cell).
    pub input: PathBuf,
    #[arg(long = "samples", default_value_t = 10_000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `fourpoint.json` and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourpointReport {
    pub delta: f64,
    pub quadruple: [String; 4],
    /// `rho ln 2`, reported for two-dimensional configurations.
    pub bound: Option<f64>,
}

impl FourpointReport {
    pub fn summary(&self) -> String {
        let mut s = format!("max delta {} at ({})", self.delta, self.quadruple.join(", "));
        if let Some(b) = self.bound {
            let _ = write!(s, "; bound rho*ln2 = {b}");
        }
        s
    }
}

/// Largest sampled four-point delta of a configuration or distance matrix.
pub fn cmd_fourpoint(args: &FourpointArgs) -> Result<FourpointReport> {
    let text = read_text(&args.input)?;
    let first = text.lines().next().unwrap_or_default();
    let (labels, q, bound) = if first.starts_with(',') {
        let d = DistanceMatrix::from_csv(&text)?;
        let q = max_quadruple_delta(d.len(), args.n_samples, args.seed, |i, j| d.get(i, j))?;
        (d.labels().to_vec(), q, None)
    } else {
        let c = configuration_from_csv(&text)?;
        let q = sampled_delta(&c, args.n_samples, args.seed)?;
        let bound = (c.dim() == 2).then(|| c.rho() * std::f64::consts::LN_2);
        (c.labels().to_vec(), q, bound)
    };
    let report = FourpointReport {
        delta: q.delta,
        quadruple: q.indices.map(|i| labels[i].clone()),
        bound,
    };
    if let Some(out) = &args.out {
        let path = out.join("fourpoint.json");
        write_text(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        let mut manifest = RunManifest::new("fourpoint", args.seed, args)?;
        manifest.inputs = vec![args.input.clone()];
        manifest.outputs = vec![path];
        manifest.write(out)?;
    }
    Ok(report)
}

/// Re-runs the command recorded in a manifest, optionally into another
/// output directory.
pub fn replay(manifest: &Path, out: Option<&Path>) -> Result<Outcome> {
    let m = RunManifest::read(manifest)?;
    let mut args = m.args.clone();
    if let (Some(dir), Some(obj)) = (out, args.as_object_mut()) {
        obj.insert("out".into(), serde_json::to_value(dir)?);
    }
    match m.command.as_str() {
        "simulate" => cmd_simulate(&serde_json::from_value(args)?),
        "infer" => cmd_infer(&serde_json::from_value(args)?),
        "embed" => cmd_embed(&serde_json::from_value(args)?),
        "fourpoint" => cmd_fourpoint(&serde_json::from_value(args)?).map(|r| Outcome::ok(r.summary())),
        "study" => cmd_study(&serde_json::from_value(args)?),
        other => Err(Error::Validation(format!("unknown command {other:?} in manifest"))),
    }
}
