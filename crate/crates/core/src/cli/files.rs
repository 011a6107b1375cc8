//! File formats used by the command layer.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypgeom::{minkowski, to_poincare, HyperPoint, PointConfiguration};
use crate::treekit::{csv_field, split_csv};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Configuration CSV: header `label,x1,...,x{m+1}`, one point per row in
/// Minkowski coordinates (time-like last).
pub fn configuration_to_csv(c: &PointConfiguration) -> String {
    let mut out = String::from("label");
    for k in 1..=c.dim() + 1 {
        let _ = write!(out, ",x{k}");
    }
    out.push('\n');
    for (l, p) in c.labels().iter().zip(c.points()) {
        out.push_str(&csv_field(l));
        for x in p.coords() {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

/// Reads a configuration CSV. The radius is recovered from the first point.
pub fn configuration_from_csv(text: &str) -> Result<PointConfiguration> {
    let mut lines = text
        .split_inclusive('\n')
        .scan(0usize, |off, l| {
            let start = *off;
            *off += l.len();
            Some((start, l.trim_end()))
        })
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(0, "empty configuration file"))?;
    let cols = split_csv(header);
    if cols.len() < 4 || cols[0].trim() != "label" {
        return Err(Error::parse(0, "configuration header must be label,x1,...,x{m+1} with m >= 2"));
    }
    let width = cols.len() - 1;
    let mut labels = Vec::new();
    let mut coords: Vec<Vec<f64>> = Vec::new();
    for (offset, line) in lines {
        let cells = split_csv(line);
        if cells.len() != width + 1 {
            return Err(Error::parse(offset, format!("expected {} cells, found {}", width + 1, cells.len())));
        }
        labels.push(cells[0].trim().to_string());
        coords.push(
            cells[1..]
                .iter()
                .map(|c| c.trim().parse::<f64>().map_err(|_| Error::parse(offset, format!("invalid number {c:?}"))))
                .collect::<Result<_>>()?,
        );
    }
    let first = coords.first().ok_or_else(|| Error::parse(0, "configuration has no points"))?;
    let rho = (-minkowski(first, first)).sqrt();
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Validation("first point is not on a hyperboloid".into()));
    }
    let points = coords
        .into_iter()
        .map(|c| HyperPoint::new(c, rho))
        .collect::<Result<Vec<_>>>()?;
    PointConfiguration::new(labels, points)
}

/// Poincaré-ball coordinates, header `label,y1,...,ym`.
pub fn poincare_to_csv(c: &PointConfiguration) -> String {
    let mut out = String::from("label");
    for k in 1..=c.dim() {
        let _ = write!(out, ",y{k}");
    }
    out.push('\n');
    for (l, p) in c.labels().iter().zip(c.points()) {
        out.push_str(&csv_field(l));
        for y in to_poincare(p).coords() {
            let _ = write!(out, ",{y}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::{embed_tree, EmbeddingConfigIn};
    use crate::treekit::Tree;

    #[test]
    fn configuration_round_trip() {
        let c = embed_tree(&EmbeddingConfigIn { tree: Tree::balanced(2, 0.3), m: 3, rho: 0.5, seed: 1 }).unwrap();
        let back = configuration_from_csv(&configuration_to_csv(&c)).unwrap();
        assert_eq!(back.labels(), c.labels());
        for (a, b) in back.points().iter().zip(c.points()) {
            assert_eq!(a.coords(), b.coords());
        }
        assert!((back.rho() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn malformed_configuration() {
        assert!(configuration_from_csv("").is_err());
        assert!(configuration_from_csv("label,x1,x2,x3\n").is_err());
        assert!(matches!(
            configuration_from_csv("label,x1,x2,x3\na,0,0,1\nb,0,x,1\n"),
            Err(Error::Parse { offset: 23, .. })
        ));
        assert!(configuration_from_csv("label,x1,x2,x3\na,0,0,1\nb,1,0,1\n").is_err());
    }

    #[test]
    fn poincare_points_inside_ball() {
        let c = embed_tree(&EmbeddingConfigIn { tree: Tree::balanced(3, 0.25), m: 2, rho: 1.0, seed: 3 }).unwrap();
        let csv = poincare_to_csv(&c);
        assert!(csv.starts_with("label,y1,y2\n"));
        for line in csv.lines().skip(1) {
            let v: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            assert!(v[0] * v[0] + v[1] * v[1] < 1.0);
        }
    }
}
