//! Newick reading and canonical writing.

use std::fmt::Write as _;

use super::Tree;
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            // [comments]
            if self.peek() == Some(b'[') {
                while self.pos < self.src.len() && self.src[self.pos] != b']' {
                    self.pos += 1;
                }
                self.pos += 1;
                continue;
            }
            break;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(b) if b == c => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => Err(Error::parse(
                self.pos,
                format!("expected '{}', found '{}'", c as char, b as char),
            )),
            None => Err(Error::parse(self.pos, format!("expected '{}', found end of input", c as char))),
        }
    }

    fn label(&mut self) -> Result<Option<String>> {
        self.skip_ws();
        if self.peek() == Some(b'\'') {
            let start = self.pos;
            self.pos += 1;
            let mut out = Vec::new();
            loop {
                match self.peek() {
                    None => return Err(Error::parse(start, "unterminated quoted label")),
                    Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                        out.push(b'\'');
                        self.pos += 2;
                    }
                    Some(b'\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b) => {
                        out.push(b);
                        self.pos += 1;
                    }
                }
            }
            return String::from_utf8(out)
                .map(Some)
                .map_err(|_| Error::parse(start, "label is not valid UTF-8"));
        }
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b"(),:;[".contains(&b) || b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Ok(None);
        }
        let raw = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| Error::parse(start, "label is not valid UTF-8"))?;
        Ok(Some(raw.to_string()))
    }

    fn length(&mut self) -> Result<f64> {
        self.skip_ws();
        if self.peek() != Some(b':') {
            return Ok(0.0);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() || b"+-.eE".contains(&b) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let raw = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::parse(start, format!("invalid branch length {raw:?}")))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::parse(start, format!("negative or non-finite branch length {v}")));
        }
        Ok(v)
    }

    /// Parses the subtree starting at the cursor as a child of `parent`
    /// (or as the root when `parent` is None).
    fn subtree(&mut self, tree: &mut Tree, parent: Option<usize>) -> Result<()> {
        self.skip_ws();
        let id = match parent {
            Some(p) => tree.add_child(p, None, 0.0),
            None => 0,
        };
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                self.subtree(tree, Some(id))?;
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b) => {
                        return Err(Error::parse(self.pos, format!("unexpected '{}'", b as char)))
                    }
                    None => return Err(Error::parse(self.pos, "unbalanced parentheses")),
                }
            }
        }
        let label = self.label()?;
        let len = self.length()?;
        if tree.node(id).is_leaf() && label.is_none() {
            return Err(Error::parse(self.pos, "leaf without a label"));
        }
        let node = &mut tree.nodes_mut()[id];
        node.label = label;
        node.length = if parent.is_some() { len } else { 0.0 };
        Ok(())
    }
}

/// Parses one Newick tree. Branch lengths are optional (default 0). The
/// tree is flagged rooted when its top level has exactly two children.
pub fn parse_newick(text: &str) -> Result<Tree> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut tree = Tree::with_root(None);
    p.subtree(&mut tree, None)?;
    p.expect(b';')?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(Error::parse(p.pos, "trailing characters after ';'"));
    }
    let top = tree.node(tree.root()).children().len();
    tree.set_rooted(top == 2);
    tree.validate()?;
    Ok(tree)
}

/// Parses a file holding one tree per non-empty line.
pub fn parse_newick_lines(text: &str) -> Result<Vec<Tree>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if !line.trim().is_empty() {
            out.push(parse_newick(line).map_err(|e| match e {
                Error::Parse { offset: o, message } => Error::Parse {
                    offset: offset + o,
                    message,
                },
                e => e,
            })?);
        }
        offset += line.len();
    }
    Ok(out)
}

fn write_label(out: &mut String, label: &str) {
    if label.bytes().any(|b| b"(),:;[]' ".contains(&b) || b.is_ascii_whitespace()) {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(label);
    }
}

/// Canonical Newick: children ordered by smallest descendant label, lengths
/// with six decimals, no length on the top node.
pub fn write_newick(t: &Tree) -> String {
    let mut canon = t.clone();
    canon.canonicalize();
    let mut out = String::new();
    write_node(&canon, canon.root(), &mut out);
    out.push(';');
    out
}

fn write_node(t: &Tree, id: usize, out: &mut String) {
    let node = t.node(id);
    if !node.is_leaf() {
        out.push('(');
        for (k, &c) in node.children().iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write_node(t, c, out);
        }
        out.push(')');
    }
    if let Some(l) = node.label() {
        write_label(out, l);
    }
    if id != t.root() {
        let _ = write!(out, ":{:.6}", node.length());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treekit::{random_topology, rf_distance, sample_edge_lengths};
    use proptest::prelude::*;

    #[test]
    fn two_leaf_tree() {
        let t = parse_newick("(A:1,B:1);").unwrap();
        assert_eq!(t.n_leaves(), 2);
        assert!(t.is_rooted());
        for e in t.edges() {
            assert_eq!(t.node(e).length(), 1.0);
        }
        assert_eq!(write_newick(&t), "(A:1.000000,B:1.000000);");
    }

    #[test]
    fn quartet_structure() {
        let t = parse_newick("((A:1,B:1):1,(C:1,D:1):1);").unwrap();
        assert_eq!(t.n_leaves(), 4);
        let root = t.node(t.root());
        assert_eq!(root.children().len(), 2);
        let mut groups: Vec<Vec<String>> = root
            .children()
            .iter()
            .map(|&c| {
                let mut l: Vec<String> = t
                    .node(c)
                    .children()
                    .iter()
                    .map(|&g| t.node(g).label().unwrap().to_string())
                    .collect();
                l.sort();
                l
            })
            .collect();
        groups.sort();
        assert_eq!(groups, vec![vec!["A", "B"], vec!["C", "D"]]);
    }

    #[test]
    fn canonical_order() {
        let a = parse_newick("((D:1,C:2):1,(B:1,A:1):1);").unwrap();
        let b = parse_newick("((A:1,B:1):1,(C:2,D:1):1);").unwrap();
        assert_eq!(write_newick(&a), write_newick(&b));
        assert_eq!(write_newick(&a), "((A:1.000000,B:1.000000):1.000000,(C:2.000000,D:1.000000):1.000000);");
    }

    #[test]
    fn balanced_tree_serialization() {
        let s = write_newick(&Tree::balanced(3, 0.25));
        assert_eq!(s.matches(":0.250000").count(), 14);
        assert!(!s.contains(":0.0"));
        assert!(s.starts_with("(((1:0.250000,2:0.250000):0.250000"));
    }

    #[test]
    fn optional_lengths_comments_and_quotes() {
        let t = parse_newick(" ( a , 'b c' [note] , (d,e)x ) ; ").unwrap();
        assert_eq!(t.n_leaves(), 4);
        assert!(!t.is_rooted());
        assert!(t.find_leaf("b c").is_some());
        assert!(write_newick(&t).contains("'b c'"));
        assert_eq!(parse_newick(&write_newick(&t)).unwrap().leaf_labels(), t.leaf_labels());
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["(A:1,B:1)", "(A:1,B:1;", "(A:x,B:1);", "(A,B));", "(A,);", "(A:-1,B:1);"] {
            assert!(matches!(parse_newick(bad), Err(Error::Parse { .. })), "{bad}");
        }
        match parse_newick("(A:1,B:1)x").unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, 10),
            e => panic!("{e}"),
        }
        assert!(matches!(parse_newick("(A,A);"), Err(Error::Validation(_))));
    }

    #[test]
    fn multiple_lines() {
        let trees = parse_newick_lines("(A,B);\n\n((A,B),C);\n").unwrap();
        assert_eq!(trees.len(), 2);
        match parse_newick_lines("(A,B);\n(A,B\n").unwrap_err() {
            Error::Parse { offset, .. } => assert!(offset >= 7),
            e => panic!("{e}"),
        }
    }

    proptest! {
        #[test]
        fn round_trip_preserves_topology_and_lengths(n in 3usize..20, seed in any::<u64>()) {
            let t = sample_edge_lengths(&random_topology(n, seed).unwrap(), 0.05, 0.2, seed).unwrap();
            let back = parse_newick(&write_newick(&t)).unwrap();
            prop_assert_eq!(rf_distance(&t, &back).unwrap(), 0);
            let d1 = crate::treekit::leaf_distances(&t);
            let d2 = crate::treekit::leaf_distances(&back);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((d1.get(i, j) - d2.get(i, j)).abs() < 1e-5);
                }
            }
            prop_assert_eq!(write_newick(&back), write_newick(&t));
        }
    }
}
