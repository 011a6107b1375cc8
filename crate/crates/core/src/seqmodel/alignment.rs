use std::collections::HashSet;
use std::fmt::Write as _;

use super::jc::ml_pairwise_distance;
use crate::error::{Error, Result};
use crate::treekit::DistanceMatrix;

/// Homologous DNA sequences of equal length over `{A, C, G, T}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    taxa: Vec<String>,
    sequences: Vec<Vec<u8>>,
}

pub(crate) fn base_index(b: u8) -> Option<u8> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

pub(crate) const BASES: [u8; 4] = [b'A', b'C', b'G', b'T'];

impl Alignment {
    /// Sequences are upper-cased; anything outside `ACGT` is rejected.
    pub fn new(taxa: Vec<String>, sequences: Vec<String>) -> Result<Self> {
        if taxa.len() != sequences.len() {
            return Err(Error::Validation(format!(
                "{} taxa but {} sequences",
                taxa.len(),
                sequences.len()
            )));
        }
        if taxa.is_empty() {
            return Err(Error::Validation("empty alignment".into()));
        }
        let mut seen = HashSet::new();
        for t in &taxa {
            if t.is_empty() || !seen.insert(t.as_str()) {
                return Err(Error::Validation(format!("duplicate or empty taxon label {t:?}")));
            }
        }
        let mut seqs = Vec::with_capacity(sequences.len());
        for (t, s) in taxa.iter().zip(sequences) {
            let s = s.to_ascii_uppercase().into_bytes();
            if let Some(pos) = s.iter().position(|&b| base_index(b).is_none()) {
                return Err(Error::Validation(format!(
                    "taxon {t}: invalid base {:?} at site {}",
                    s[pos] as char,
                    pos + 1
                )));
            }
            seqs.push(s);
        }
        let len = seqs[0].len();
        if len == 0 {
            return Err(Error::Validation("sequences must have length >= 1".into()));
        }
        if let Some((t, s)) = taxa.iter().zip(&seqs).find(|(_, s)| s.len() != len) {
            return Err(Error::Validation(format!(
                "taxon {t} has length {}, expected {len}",
                s.len()
            )));
        }
        Ok(Alignment {
            taxa,
            sequences: seqs,
        })
    }

    pub(crate) fn from_codes(taxa: Vec<String>, codes: Vec<Vec<u8>>) -> Self {
        let sequences = codes
            .into_iter()
            .map(|c| c.into_iter().map(|b| BASES[b as usize]).collect())
            .collect();
        Alignment { taxa, sequences }
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    /// Number of sites L.
    pub fn length(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn sequence(&self, i: usize) -> &str {
        std::str::from_utf8(&self.sequences[i]).expect("alignment holds ASCII")
    }

    pub(crate) fn bytes(&self, i: usize) -> &[u8] {
        &self.sequences[i]
    }

    pub fn index_of(&self, taxon: &str) -> Option<usize> {
        self.taxa.iter().position(|t| t == taxon)
    }

    /// Reads FASTA. Headers are taxon labels (text up to the first
    /// whitespace); sequence lines may be wrapped.
    pub fn from_fasta(text: &str) -> Result<Self> {
        let mut taxa: Vec<String> = Vec::new();
        let mut seqs: Vec<String> = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim();
            if let Some(header) = trimmed.strip_prefix('>') {
                let label = header.split_whitespace().next().unwrap_or("");
                if label.is_empty() {
                    return Err(Error::parse(offset, "empty FASTA header"));
                }
                taxa.push(label.to_string());
                seqs.push(String::new());
            } else if !trimmed.is_empty() {
                let Some(seq) = seqs.last_mut() else {
                    return Err(Error::parse(offset, "sequence data before the first header"));
                };
                let start = offset + (line.len() - line.trim_start().len());
                for (k, c) in trimmed.char_indices() {
                    if c.is_whitespace() {
                        continue;
                    }
                    let u = c.to_ascii_uppercase();
                    if !u.is_ascii() || base_index(u as u8).is_none() {
                        return Err(Error::parse(
                            start + k,
                            format!("invalid base {c:?} (only A, C, G, T are accepted)"),
                        ));
                    }
                    seq.push(u);
                }
            }
            offset += line.len();
        }
        if taxa.is_empty() {
            return Err(Error::parse(0, "no FASTA records"));
        }
        Alignment::new(taxa, seqs)
    }

    /// Writes FASTA with sequence lines wrapped at 60 columns.
    pub fn to_fasta(&self) -> String {
        let mut out = String::new();
        for (t, s) in self.taxa.iter().zip(&self.sequences) {
            let _ = writeln!(out, ">{t}");
            for chunk in s.chunks(60) {
                out.push_str(std::str::from_utf8(chunk).expect("ascii"));
                out.push('\n');
            }
        }
        out
    }
}

/// Pairwise site-difference rates, the sufficient statistic of the
/// Jukes-Cantor pairwise likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffRateMatrix {
    labels: Vec<String>,
    length: usize,
    rates: Vec<f64>,
}

impl DiffRateMatrix {
    /// Builds the matrix from explicit rates, e.g. noiseless expected rates.
    /// Rates need not be multiples of `1 / length`.
    pub fn from_rates(labels: Vec<String>, rates: Vec<Vec<f64>>, length: usize) -> Result<Self> {
        let n = labels.len();
        if rates.len() != n || rates.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("rate matrix is not {n}x{n}")));
        }
        if length == 0 {
            return Err(Error::Validation("sequence length must be >= 1".into()));
        }
        let mut seen = HashSet::new();
        if labels.iter().any(|l| l.is_empty() || !seen.insert(l.as_str())) {
            return Err(Error::Validation("duplicate or empty label".into()));
        }
        for i in 0..n {
            if rates[i][i] != 0.0 {
                return Err(Error::Validation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let r = rates[i][j];
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::Validation(format!("rate {r} outside [0, 1]")));
                }
                if r != rates[j][i] {
                    return Err(Error::Validation(format!("rates not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DiffRateMatrix {
            labels,
            length,
            rates: rates.into_iter().flatten().collect(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    #[inline]
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.labels.len() + j]
    }

    /// Independent maximum-likelihood distances, saturated pairs capped.
    pub fn ml_distances(&self) -> DistanceMatrix {
        let n = self.n();
        let d = (0..n)
            .map(|i| (0..n).map(|j| ml_pairwise_distance(self.rate(i, j))).collect())
            .collect();
        DistanceMatrix::new(self.labels.clone(), d).expect("ml distances form a valid matrix")
    }

    /// Pairs whose difference rate is at or beyond saturation (>= 3/4).
    pub fn saturated_pairs(&self) -> Vec<(String, String)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.rate(i, j) >= 0.75 {
                    out.push((self.labels[i].clone(), self.labels[j].clone()));
                }
            }
        }
        out
    }
}

/// `r_ij` = fraction of sites at which sequences i and j differ.
pub fn diff_rates(a: &Alignment) -> DiffRateMatrix {
    let n = a.n_taxa();
    let len = a.length();
    let mut rates = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let diffs = a
                .bytes(i)
                .iter()
                .zip(a.bytes(j))
                .filter(|(x, y)| x != y)
                .count();
            let r = diffs as f64 / len as f64;
            rates[i][j] = r;
            rates[j][i] = r;
        }
    }
    DiffRateMatrix {
        labels: a.taxa.clone(),
        length: len,
        rates: rates.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aln(pairs: &[(&str, &str)]) -> Alignment {
        Alignment::new(
            pairs.iter().map(|p| p.0.to_string()).collect(),
            pairs.iter().map(|p| p.1.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn hand_counted_rate() {
        let a = aln(&[("a", "ACGT"), ("b", "ACGA")]);
        let r = diff_rates(&a);
        assert_eq!(r.rate(0, 1), 0.25);
        assert_eq!(r.rate(1, 0), 0.25);
        assert_eq!(r.rate(0, 0), 0.0);
    }

    #[test]
    fn identical_sequences_give_zero() {
        let a = aln(&[("a", "ACGTTT"), ("b", "ACGTTT"), ("c", "ACGTTT")]);
        let r = diff_rates(&a);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r.rate(i, j), 0.0);
            }
        }
    }

    #[test]
    fn site_permutation_invariance() {
        let a = aln(&[("a", "ACGTAC"), ("b", "ACCTAA"), ("c", "TTGTAC")]);
        let perm = [3, 0, 5, 1, 4, 2];
        let shuffled: Vec<(String, String)> = a
            .taxa()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let s = a.sequence(i).as_bytes();
                (t.clone(), perm.iter().map(|&k| s[k] as char).collect())
            })
            .collect();
        let b = aln(&shuffled.iter().map(|(t, s)| (t.as_str(), s.as_str())).collect::<Vec<_>>());
        assert_eq!(diff_rates(&a), diff_rates(&b));
    }

    #[test]
    fn validation_errors() {
        assert!(Alignment::new(vec!["a".into(), "a".into()], vec!["A".into(), "C".into()]).is_err());
        assert!(Alignment::new(vec!["a".into(), "b".into()], vec!["AC".into(), "C".into()]).is_err());
        assert!(Alignment::new(vec!["a".into(), "b".into()], vec!["AN".into(), "CC".into()]).is_err());
        assert!(Alignment::new(vec!["a".into()], vec!["".into()]).is_err());
    }

    #[test]
    fn fasta_reads_wrapped_and_lowercase() {
        let text = ">t1 some description\nACGT\nac\n>t2\nACGTAA\n";
        let a = Alignment::from_fasta(text).unwrap();
        assert_eq!(a.taxa(), &["t1".to_string(), "t2".to_string()]);
        assert_eq!(a.sequence(0), "ACGTAC");
        assert_eq!(Alignment::from_fasta(&a.to_fasta()).unwrap(), a);
    }

    #[test]
    fn fasta_rejects_ambiguity_codes_with_offset() {
        let err = Alignment::from_fasta(">a\nACGR\n>b\nACGT\n").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 6),
            e => panic!("unexpected {e}"),
        }
        assert!(Alignment::from_fasta("ACGT\n").is_err());
    }

    #[test]
    fn rate_matrix_validation() {
        let l = vec!["a".to_string(), "b".to_string()];
        assert!(DiffRateMatrix::from_rates(l.clone(), vec![vec![0.0, 0.1], vec![0.2, 0.0]], 10).is_err());
        assert!(DiffRateMatrix::from_rates(l.clone(), vec![vec![0.0, 1.1], vec![1.1, 0.0]], 10).is_err());
        let m = DiffRateMatrix::from_rates(l, vec![vec![0.0, 0.8], vec![0.8, 0.0]], 10).unwrap();
        assert_eq!(m.saturated_pairs().len(), 1);
        assert_eq!(m.ml_distances().get(0, 1), crate::seqmodel::T_MAX);
    }
}
