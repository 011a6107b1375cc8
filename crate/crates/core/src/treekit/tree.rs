use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub(crate) label: Option<String>,
    pub(crate) parent: Option<usize>,
    pub(crate) children: Vec<usize>,
    /// Length of the edge to the parent; zero for the root.
    pub(crate) length: f64,
}

impl Node {
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Phylogenetic tree stored as an arena with a distinguished anchor node.
///
/// A rooted tree's anchor is its root. For an unrooted tree the anchor is an
/// arbitrary internal node and carries no meaning; a degree-2 anchor of an
/// unrooted tree is transparent (its two edges form one edge).
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: usize,
    rooted: bool,
}

/// Undirected weighted adjacency view of a tree.
pub(crate) type Adjacency = Vec<Vec<(usize, f64)>>;

impl Tree {
    /// A tree consisting of a single root node.
    pub fn with_root(label: Option<String>) -> Self {
        Tree {
            nodes: vec![Node {
                label,
                parent: None,
                children: Vec::new(),
                length: 0.0,
            }],
            root: 0,
            rooted: true,
        }
    }

    pub fn add_child(&mut self, parent: usize, label: Option<String>, length: f64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            label,
            parent: Some(parent),
            children: Vec::new(),
            length,
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn set_rooted(&mut self, rooted: bool) {
        self.rooted = rooted;
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn set_length(&mut self, id: usize, length: f64) {
        self.nodes[id].length = length;
    }

    /// Node ids of all non-root nodes, i.e. one id per edge.
    pub fn edges(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| i != self.root).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Leaf labels in ascending order.
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self
            .leaves()
            .into_iter()
            .filter_map(|i| self.nodes[i].label.clone())
            .collect();
        l.sort();
        l
    }

    pub fn find_leaf(&self, label: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.is_leaf() && n.label.as_deref() == Some(label))
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = self.preorder();
        out.reverse();
        out
    }

    /// Parents before children, children in stored order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Smallest leaf label below each node.
    pub(crate) fn min_labels(&self) -> Vec<String> {
        let mut min: Vec<Option<String>> = vec![None; self.nodes.len()];
        for v in self.postorder() {
            let node = &self.nodes[v];
            let m = if node.is_leaf() {
                node.label.clone()
            } else {
                node.children.iter().filter_map(|&c| min[c].clone()).min()
            };
            min[v] = m;
        }
        min.into_iter().map(|m| m.unwrap_or_default()).collect()
    }

    /// Children of every node sorted by smallest descendant leaf label.
    pub fn canonicalize(&mut self) {
        let min = self.min_labels();
        for node in &mut self.nodes {
            node.children.sort_by(|&a, &b| min[a].cmp(&min[b]));
        }
    }

    /// Checks connectivity from the anchor, nonnegative finite lengths and
    /// unique nonempty leaf labels.
    pub fn validate(&self) -> Result<()> {
        if self.preorder().len() != self.nodes.len() {
            return Err(Error::Validation("tree is not connected".into()));
        }
        let mut seen = HashSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if i != self.root && !(n.length >= 0.0 && n.length.is_finite()) {
                return Err(Error::Validation(format!(
                    "edge length {} is negative or not finite",
                    n.length
                )));
            }
            if n.is_leaf() {
                match &n.label {
                    Some(l) if !l.is_empty() => {
                        if !seen.insert(l.as_str()) {
                            return Err(Error::Validation(format!("duplicate leaf label {l}")));
                        }
                    }
                    _ => return Err(Error::Validation("unlabelled leaf".into())),
                }
            }
        }
        Ok(())
    }

    pub(crate) fn adjacency(&self) -> Adjacency {
        let mut adj: Adjacency = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                adj[i].push((p, n.length));
                adj[p].push((i, n.length));
            }
        }
        adj
    }

    /// Builds a tree from an undirected adjacency by hanging it from `anchor`.
    pub(crate) fn from_adjacency(
        adj: &Adjacency,
        labels: &[Option<String>],
        anchor: usize,
        rooted: bool,
    ) -> Tree {
        let mut tree = Tree::with_root(labels[anchor].clone());
        tree.rooted = rooted;
        let mut stack = vec![(anchor, usize::MAX, 0usize)];
        while let Some((v, from, id)) = stack.pop() {
            for &(w, len) in adj[v].iter().rev() {
                if w == from {
                    continue;
                }
                let cid = tree.add_child(id, labels[w].clone(), len);
                stack.push((w, v, cid));
            }
        }
        tree
    }

    pub(crate) fn labels(&self) -> Vec<Option<String>> {
        self.nodes.iter().map(|n| n.label.clone()).collect()
    }

    /// The unrooted version of this tree: a degree-2 anchor is suppressed
    /// and its two edges joined.
    pub fn unrooted(&self) -> Tree {
        let root = &self.nodes[self.root];
        if root.children.len() != 2 {
            let mut t = self.clone();
            t.rooted = false;
            return t;
        }
        let (a, b) = (root.children[0], root.children[1]);
        let joined = self.nodes[a].length + self.nodes[b].length;
        let mut adj = self.adjacency();
        let labels = self.labels();
        adj[self.root].clear();
        adj[a].retain(|&(w, _)| w != self.root);
        adj[b].retain(|&(w, _)| w != self.root);
        adj[a].push((b, joined));
        adj[b].push((a, joined));
        // re-anchor at an internal node when there is one
        let anchor = if !self.nodes[a].is_leaf() {
            a
        } else if !self.nodes[b].is_leaf() {
            b
        } else {
            // two-leaf tree: keep a transparent degree-2 anchor
            let mut t = self.clone();
            t.rooted = false;
            return t;
        };
        // the old anchor is unreachable now and is dropped
        Tree::from_adjacency(&adj, &labels, anchor, false)
    }

    /// The balanced rooted binary tree with `2^depth` leaves labelled
    /// `1..=2^depth` and every edge of length `edge_length`.
    pub fn balanced(depth: u32, edge_length: f64) -> Tree {
        let mut tree = Tree::with_root(None);
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &v in &frontier {
                for _ in 0..2 {
                    next.push(tree.add_child(v, None, edge_length));
                }
            }
            frontier = next;
        }
        for (k, &v) in frontier.iter().enumerate() {
            tree.nodes[v].label = Some((k + 1).to_string());
        }
        tree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_tree_shape() {
        let t = Tree::balanced(3, 0.25);
        assert_eq!(t.n_leaves(), 8);
        assert_eq!(t.nodes().len(), 15);
        assert!(t.is_rooted());
        t.validate().unwrap();
        let u = t.unrooted();
        assert!(!u.is_rooted());
        assert_eq!(u.edges().len(), 2 * 8 - 3);
        assert_eq!(u.node(u.root()).children().len(), 3);
        u.validate().unwrap();
    }

    #[test]
    fn validation_catches_duplicates_and_negative_lengths() {
        let mut t = Tree::with_root(None);
        t.add_child(0, Some("a".into()), 1.0);
        t.add_child(0, Some("a".into()), 1.0);
        assert!(t.validate().is_err());
        let mut t = Tree::with_root(None);
        t.add_child(0, Some("a".into()), -1.0);
        t.add_child(0, Some("b".into()), 1.0);
        assert!(t.validate().is_err());
    }
}
