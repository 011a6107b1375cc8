//! Simulation studies: for each grid point, tree and alignment replicate,
//! infer a tree with every built-in method and score it against the
//! generating tree.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::files::write_text;
use super::pipeline::{infer, infer_nj};
use super::{OptimizerFlags, Outcome, RunManifest};
use crate::error::{Error, Result};
use crate::optimizer::OptimizerSettings;
use crate::rng::derive_seed;
use crate::seqmodel::{simulate_alignment, Alignment};
use crate::treekit::{
    csv_field, optimize_branch_lengths, random_topology, rf_distance, sample_edge_lengths, split_csv, splits, Tree,
};

pub const STUDY_FILE: &str = "study.csv";

const HEADER: &str = "kind,grid_value,tree_id,replicate,method,rf_distance,topology_match,\
loglik_inferred,loglik_generating,loglik_success,converged,wall_time_s,error";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    /// Vary the number of taxa at fixed sequence length.
    Taxa,
    /// Vary the sequence length at fixed number of taxa.
    Length,
}

impl StudyKind {
    fn name(self) -> &'static str {
        match self {
            StudyKind::Taxa => "taxa",
            StudyKind::Length => "length",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StudyArgs {
    #[arg(value_enum)]
    pub kind: StudyKind,
    /// Comma-separated grid of taxon counts or sequence lengths.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<usize>,
    /// Generating trees per grid point.
    #[arg(long)]
    pub trees: Option<usize>,
    /// Alignments per tree.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Taxon count for length studies.
    #[arg(long = "leaves")]
    pub n_leaves: Option<usize>,
    /// Sequence length for taxa studies.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.2)]
    pub hi: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long = "dim", default_value_t = 30)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub optimizer: OptimizerFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

impl StudyArgs {
    /// Arguments with every study default filled in.
    pub fn new(kind: StudyKind, out: PathBuf) -> Self {
        StudyArgs {
            kind,
            grid: Vec::new(),
            trees: None,
            replicates: None,
            n_leaves: None,
            length: None,
            lo: 0.05,
            hi: 0.2,
            rho: 0.5,
            m: 30,
            optimizer: OptimizerFlags::default(),
            seed: 0,
            out,
        }
    }
}

struct Plan {
    grid: Vec<usize>,
    trees: usize,
    replicates: usize,
    n_leaves: usize,
    length: usize,
}

fn plan(args: &StudyArgs) -> Plan {
    let (grid, trees, replicates): (&[usize], usize, usize) = match args.kind {
        StudyKind::Taxa => (&[5, 10, 20, 30], 10, 4),
        StudyKind::Length => (&[100, 250, 500, 750], 8, 12),
    };
    Plan {
        grid: if args.grid.is_empty() { grid.to_vec() } else { args.grid.clone() },
        trees: args.trees.unwrap_or(trees),
        replicates: args.replicates.unwrap_or(replicates),
        n_leaves: args.n_leaves.unwrap_or(30),
        length: args.length.unwrap_or(200),
    }
}

/// One row of the study table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub kind: StudyKind,
    pub grid_value: usize,
    pub tree_id: usize,
    pub replicate: usize,
    pub method: String,
    pub rf_distance: Option<usize>,
    pub topology_match: bool,
    pub loglik_inferred: Option<f64>,
    pub loglik_generating: Option<f64>,
    pub loglik_success: bool,
    pub converged: bool,
    pub wall_time_s: f64,
    pub error: String,
}

impl StudyRecord {
    fn csv_line(&self) -> String {
        let opt = |x: Option<String>| x.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind.name(),
            self.grid_value,
            self.tree_id,
            self.replicate,
            self.method,
            opt(self.rf_distance.map(|r| r.to_string())),
            self.topology_match,
            opt(self.loglik_inferred.map(|x| x.to_string())),
            opt(self.loglik_generating.map(|x| x.to_string())),
            self.loglik_success,
            self.converged,
            self.wall_time_s,
            csv_field(&self.error)
        )
    }
}

pub fn study_to_csv(records: &[StudyRecord]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Reads a study table written by [`cmd_study`].
pub fn read_study_csv(text: &str) -> Result<Vec<StudyRecord>> {
    let mut offset = 0;
    let mut lines = text.split_inclusive('\n').map(|l| {
        let start = offset;
        offset += l.len();
        (start, l.trim_end_matches(['\n', '\r']))
    });
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(Error::parse(0, "missing study header")),
    }
    let mut out = Vec::new();
    for (off, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let c = split_csv(line);
        if c.len() != 13 {
            return Err(Error::parse(off, format!("expected 13 cells, found {}", c.len())));
        }
        let bad = |what: &str| Error::parse(off, format!("invalid {what}"));
        let int = |s: &str, what: &str| s.parse::<usize>().map_err(|_| bad(what));
        let flag = |s: &str, what: &str| s.parse::<bool>().map_err(|_| bad(what));
        let opt_f = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|_| bad(what)) }
        };
        out.push(StudyRecord {
            kind: StudyKind::from_str(&c[0], false).map_err(|_| bad("kind"))?,
            grid_value: int(&c[1], "grid_value")?,
            tree_id: int(&c[2], "tree_id")?,
            replicate: int(&c[3], "replicate")?,
            method: c[4].clone(),
            rf_distance: if c[5].is_empty() { None } else { Some(int(&c[5], "rf_distance")?) },
            topology_match: flag(&c[6], "topology_match")?,
            loglik_inferred: opt_f(&c[7], "loglik_inferred")?,
            loglik_generating: opt_f(&c[8], "loglik_generating")?,
            loglik_success: flag(&c[9], "loglik_success")?,
            converged: flag(&c[10], "converged")?,
            wall_time_s: c[11].parse().map_err(|_| bad("wall_time_s"))?,
            error: c[12].clone(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct Task {
    grid_value: usize,
    tree_id: usize,
    replicate: usize,
    n_leaves: usize,
    length: usize,
}

/// Tuned log-likelihoods keyed by topology, so that an inferred tree equal
/// in topology to the generating tree gets exactly the generating score.
struct Scorer<'a> {
    a: &'a Alignment,
    labels: Vec<String>,
    cache: HashMap<Vec<Vec<u64>>, f64>,
}

impl<'a> Scorer<'a> {
    fn score(&mut self, t: &Tree) -> Result<f64> {
        let mut key: Vec<Vec<u64>> = splits(t, &self.labels).into_iter().collect();
        key.sort_unstable();
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = optimize_branch_lengths(t, self.a)?.1;
        self.cache.insert(key, v);
        Ok(v)
    }
}

fn run_task(args: &StudyArgs, settings: &OptimizerSettings, task: Task) -> Vec<StudyRecord> {
    let base = StudyRecord {
        kind: args.kind,
        grid_value: task.grid_value,
        tree_id: task.tree_id,
        replicate: task.replicate,
        method: String::new(),
        rf_distance: None,
        topology_match: false,
        loglik_inferred: None,
        loglik_generating: None,
        loglik_success: false,
        converged: false,
        wall_time_s: 0.0,
        error: String::new(),
    };
    let failed = |e: Error| {
        ["nj", "hyperbolic"]
            .map(|m| StudyRecord { method: m.into(), error: e.to_string(), ..base.clone() })
            .to_vec()
    };

    // Trees depend on (taxon count, tree id) only, so a length study scores
    // every sequence length on the same trees.
    let tree_key = [task.n_leaves as u64, task.tree_id as u64];
    let rep_key = [task.grid_value as u64, task.tree_id as u64, task.replicate as u64];
    let generating = random_topology(task.n_leaves, derive_seed(args.seed, &[0, tree_key[0], tree_key[1]]))
        .and_then(|t| sample_edge_lengths(&t, args.lo, args.hi, derive_seed(args.seed, &[1, tree_key[0], tree_key[1]])));
    let generating = match generating {
        Ok(t) => t,
        Err(e) => return failed(e),
    };
    let a = match simulate_alignment(&generating, task.length, derive_seed(args.seed, &[2, rep_key[0], rep_key[1], rep_key[2]])) {
        Ok(a) => a,
        Err(e) => return failed(e),
    };
    let mut scorer = Scorer {
        a: &a,
        labels: a.taxa().to_vec(),
        cache: HashMap::new(),
    };
    let generating_ll = match scorer.score(&generating) {
        Ok(v) => v,
        Err(e) => return failed(e),
    };
    let embed_seed = derive_seed(args.seed, &[3, rep_key[0], rep_key[1], rep_key[2]]);

    let mut out = Vec::new();
    for method in ["nj", "hyperbolic"] {
        let mut rec = StudyRecord {
            method: method.into(),
            loglik_generating: Some(generating_ll),
            ..base.clone()
        };
        let start = Instant::now();
        let inferred = match method {
            "nj" => infer_nj(&a).map(|t| (t, true)),
            _ => infer(&a, args.rho, args.m, settings, embed_seed, None).map(|r| (r.tree, r.converged)),
        };
        rec.wall_time_s = start.elapsed().as_secs_f64();
        let scored = inferred.and_then(|(t, converged)| {
            rec.converged = converged;
            let rf = rf_distance(&t, &generating)?;
            Ok((rf, scorer.score(&t)?))
        });
        match scored {
            Ok((rf, ll)) => {
                rec.rf_distance = Some(rf);
                rec.topology_match = rf == 0;
                rec.loglik_inferred = Some(ll);
                rec.loglik_success = ll >= generating_ll;
            }
            Err(e) => rec.error = e.to_string(),
        }
        out.push(rec);
    }
    out
}

/// Runs a simulation study and writes `study.csv` and the manifest.
/// Replicates run in parallel; each derives its seeds from the master seed
/// and its (grid value, tree, replicate) coordinates, so every column other
/// than `wall_time_s` is independent of scheduling.
pub fn cmd_study(args: &StudyArgs) -> Result<Outcome> {
    let settings = args.optimizer.settings();
    settings.validate()?;
    if !(args.lo >= 0.0 && args.lo <= args.hi) {
        return Err(Error::domain(format!("invalid edge length range [{}, {}]", args.lo, args.hi)));
    }
    let p = plan(args);
    if p.grid.is_empty() {
        return Err(Error::domain("empty study grid"));
    }
    let mut tasks = Vec::new();
    for &g in &p.grid {
        let (n_leaves, length) = match args.kind {
            StudyKind::Taxa => (g, p.length),
            StudyKind::Length => (p.n_leaves, g),
        };
        for tree_id in 0..p.trees {
            for replicate in 0..p.replicates {
                tasks.push(Task { grid_value: g, tree_id, replicate, n_leaves, length });
            }
        }
    }
    let records: Vec<StudyRecord> = tasks
        .par_iter()
        .flat_map_iter(|&t| run_task(args, &settings, t))
        .collect();

    let path = args.out.join(STUDY_FILE);
    write_text(&path, &study_to_csv(&records))?;
    let mut manifest = RunManifest::new("study", args.seed, args)?;
    manifest.rho = Some(args.rho);
    manifest.m = Some(args.m);
    manifest.settings = Some(settings);
    manifest.outputs = vec![path];
    manifest.write(&args.out)?;

    let mut summary = format!("{} rows", records.len());
    for &g in &p.grid {
        for method in ["nj", "hyperbolic"] {
            let rows: Vec<&StudyRecord> = records.iter().filter(|r| r.grid_value == g && r.method == method).collect();
            if rows.is_empty() {
                continue;
            }
            let rate = |f: fn(&StudyRecord) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / rows.len() as f64;
            let _ = write!(
                summary,
                "\n{}={g} {method}: topology {:.3}, likelihood {:.3}",
                args.kind.name(),
                rate(|r| r.topology_match),
                rate(|r| r.loglik_success)
            );
        }
    }
    let warnings = records
        .iter()
        .filter(|r| !r.error.is_empty())
        .map(|r| format!("{}={} tree {} replicate {} {}: {}", r.kind.name(), r.grid_value, r.tree_id, r.replicate, r.method, r.error))
        .collect();
    Ok(Outcome { summary, warnings, converged: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: StudyKind, dir: &std::path::Path) -> StudyArgs {
        StudyArgs {
            grid: vec![5],
            trees: Some(2),
            replicates: Some(2),
            length: Some(200),
            n_leaves: Some(5),
            m: 5,
            ..StudyArgs::new(kind, dir.to_path_buf())
        }
    }

    #[test]
    fn zero_replicates_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let args = StudyArgs { replicates: Some(0), ..small(StudyKind::Taxa, dir.path()) };
        cmd_study(&args).unwrap();
        let text = std::fs::read_to_string(dir.path().join(STUDY_FILE)).unwrap();
        assert_eq!(text, format!("{HEADER}\n"));
        assert!(read_study_csv(&text).unwrap().is_empty());
    }

    #[test]
    fn identities_hold_and_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        cmd_study(&small(StudyKind::Length, dir.path())).unwrap();
        let text = std::fs::read_to_string(dir.path().join(STUDY_FILE)).unwrap();
        let rows = read_study_csv(&text).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2);
        for r in &rows {
            assert!(r.error.is_empty(), "{}", r.error);
            assert_eq!(r.topology_match, r.rf_distance == Some(0));
            assert_eq!(r.loglik_success, r.loglik_inferred.unwrap() >= r.loglik_generating.unwrap());
        }
        assert_eq!(study_to_csv(&rows), text);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let args = StudyArgs { grid: vec![2], trees: Some(1), replicates: Some(1), ..small(StudyKind::Taxa, dir.path()) };
        cmd_study(&args).unwrap();
        let rows = read_study_csv(&std::fs::read_to_string(dir.path().join(STUDY_FILE)).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| !r.error.is_empty() && !r.loglik_success && !r.topology_match));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(read_study_csv("kind\n"), Err(Error::Parse { offset: 0, .. })));
    }
}
