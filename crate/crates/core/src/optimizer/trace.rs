use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config_distances;
use crate::error::{Error, Result};
use crate::hypgeom::PointConfiguration;
use crate::seqmodel::Alignment;
use crate::treekit::{neighbor_joining, optimize_branch_lengths, rf_distance, Tree};

/// One line of an optimization trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    /// Longest step of the sweep that produced this state.
    #[serde(rename = "max_step")]
    pub max_step_taken: f64,
    /// RF distance from the tree inferred at this state to the reference.
    pub rf: Option<usize>,
    /// Log-likelihood of the inferred tree after branch-length tuning.
    pub tree_loglik: Option<f64>,
}

impl TraceRecord {
    pub(crate) fn new(iteration: usize, objective: f64, max_step_taken: f64) -> Self {
        TraceRecord {
            iteration,
            objective,
            max_step_taken,
            rf: None,
            tree_loglik: None,
        }
    }
}

/// Optional extras for [`super::optimize`]: a reference tree to score the
/// topology inferred at each trace point, an alignment to score its
/// likelihood, and a sink receiving the records as JSON lines.
#[derive(Default)]
pub struct Tracer<'a> {
    pub reference: Option<&'a Tree>,
    pub alignment: Option<&'a Alignment>,
    pub sink: Option<&'a mut dyn Write>,
}

impl<'a> Tracer<'a> {
    pub(crate) fn fill(&self, rec: &mut TraceRecord, config: &PointConfiguration) -> Result<()> {
        if self.reference.is_none() && self.alignment.is_none() {
            return Ok(());
        }
        let inferred = neighbor_joining(&config_distances(config))?;
        if let Some(reference) = self.reference {
            rec.rf = Some(rf_distance(&inferred, reference)?);
        }
        if let Some(a) = self.alignment {
            rec.tree_loglik = Some(optimize_branch_lengths(&inferred, a)?.1);
        }
        Ok(())
    }

    pub(crate) fn emit(&mut self, rec: &TraceRecord) -> Result<()> {
        if let Some(w) = self.sink.as_deref_mut() {
            serde_json::to_writer(&mut *w, rec)?;
            w.write_all(b"\n").map_err(|e| Error::io("<trace>", e))?;
        }
        Ok(())
    }
}

/// Reads a JSON-lines trace.
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::{embed_tree, EmbeddingConfigIn};
    use crate::optimizer::{optimize, OptimizerSettings};
    use crate::seqmodel::{diff_rates, simulate_alignment};

    #[test]
    fn jsonl_round_trip_with_reference() {
        let t = Tree::balanced(2, 0.2);
        let a = simulate_alignment(&t, 300, 1).unwrap();
        let stats = diff_rates(&a);
        let init = embed_tree(&EmbeddingConfigIn { tree: t.clone(), m: 2, rho: 0.5, seed: 2 }).unwrap();
        let mut buf = Vec::new();
        let out = {
            let mut tracer = Tracer {
                reference: Some(&t),
                alignment: Some(&a),
                sink: Some(&mut buf),
            };
            let settings = OptimizerSettings { trace_every: 5, ..Default::default() };
            optimize(&init, &stats, &settings, Some(&mut tracer)).unwrap()
        };
        let back = read_trace(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, out.trace);
        assert_eq!(back[0].iteration, 0);
        assert!(back.iter().all(|r| r.rf.is_some() && r.tree_loglik.is_some()));
        assert!(std::str::from_utf8(&buf).unwrap().contains("\"max_step\""));
        assert!(back.windows(2).all(|w| w[1].iteration > w[0].iteration));
    }
}
