use std::collections::HashSet;
use std::fmt::Write as _;

use super::Tree;
use crate::error::{Error, Result};

/// Labelled symmetric matrix of nonnegative distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("distance matrix is not {n}x{n}")));
        }
        let mut seen = HashSet::new();
        if labels.iter().any(|l| l.is_empty() || !seen.insert(l.as_str())) {
            return Err(Error::Validation("duplicate or empty label".into()));
        }
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::Validation(format!("nonzero diagonal entry for {}", labels[i])));
            }
            for j in 0..n {
                let v = rows[i][j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Validation(format!("invalid distance {v}")));
                }
                if v != rows[j][i] {
                    return Err(Error::Validation(format!(
                        "asymmetric entries for ({}, {})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix {
            labels,
            d: rows.into_iter().flatten().collect(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.labels.len() + j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.len().max(1)).map(|r| r.to_vec()).collect()
    }

    /// CSV with a header row and a leading label column; the corner cell is
    /// empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for l in &self.labels {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&csv_field(l));
            for j in 0..self.len() {
                let _ = write!(out, ",{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "empty distance matrix"))?;
        let cols = split_csv(header);
        if cols.first().map(|c| !c.trim().is_empty()).unwrap_or(true) {
            return Err(Error::parse(0, "distance CSV header must start with an empty cell"));
        }
        let labels: Vec<String> = cols[1..].iter().map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (k, (lineno, line)) in lines.enumerate() {
            let cells = split_csv(line);
            if cells.len() != labels.len() + 1 {
                return Err(Error::parse(lineno, format!("row {} has {} cells", k + 1, cells.len())));
            }
            if k >= labels.len() || cells[0].trim() != labels[k] {
                return Err(Error::parse(
                    lineno,
                    format!("row label {:?} does not match the header", cells[0].trim()),
                ));
            }
            let row = cells[1..]
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(lineno, format!("invalid number {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        DistanceMatrix::new(labels, rows)
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(crate) fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

/// Path-length distances between all leaves, labels in ascending order.
pub fn leaf_distances(t: &Tree) -> DistanceMatrix {
    let labels = t.leaf_labels();
    let ids: Vec<usize> = labels
        .iter()
        .map(|l| t.find_leaf(l).expect("leaf exists"))
        .collect();
    let adj = t.adjacency();
    let n = labels.len();
    let mut rows = vec![vec![0.0; n]; n];
    let mut dist = vec![0.0; adj.len()];
    for (i, &src) in ids.iter().enumerate() {
        let mut stack = vec![(src, usize::MAX)];
        dist[src] = 0.0;
        while let Some((v, from)) = stack.pop() {
            for &(w, len) in &adj[v] {
                if w != from {
                    dist[w] = dist[v] + len;
                    stack.push((w, v));
                }
            }
        }
        for (j, &dst) in ids.iter().enumerate() {
            rows[i][j] = dist[dst];
        }
    }
    // path sums are accumulated from different ends; force exact symmetry
    for i in 0..n {
        for j in (i + 1)..n {
            rows[j][i] = rows[i][j];
        }
    }
    DistanceMatrix::new(labels, rows).expect("tree distances are a valid matrix")
}
