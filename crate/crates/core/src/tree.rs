//! Binary decision trees: structure, forecasting, prediction, metrics and
//! the text form used both as model interchange and as the string whose
//! compressibility measures model surfeit.
//!
//! The text form is
//!
//! ```text
//! def tree{X1,X2}:
//!     if X1 <= 50.5:
//!         return 0
//!     else:
//!         if X2 <= 7:
//!             return 1
//!         else:
//!             return 0
//! ```
//!
//! The header lists, in ascending order, only attributes the tree tests.
//! Attributes are 1-based, thresholds use the shortest round-trip decimal.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::data::{format_real, DataSubset, Dataset};
use crate::error::{Error, Result};
use crate::split::{partition, Split};

/// Index of a node within its tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub split: Split,
    pub left: NodeId,
    pub right: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    branch: Option<Branch>,
    class: usize,
    rows: Vec<usize>,
}

impl TreeNode {
    /// A leaf predicting `class`, trained on `rows` (may be empty for
    /// models read back from text).
    pub fn leaf(class: usize, rows: Vec<usize>) -> Self {
        TreeNode {
            branch: None,
            class,
            rows,
        }
    }

    /// Leaf holding `q`, predicting its majority class.
    pub fn from_subset(q: DataSubset<'_>) -> Result<Self> {
        let class = forecast(&q)?;
        Ok(TreeNode::leaf(class, q.into_rows()))
    }

    pub fn branch(&self) -> Option<&Branch> {
        self.branch.as_ref()
    }

    pub fn split(&self) -> Option<Split> {
        self.branch.map(|b| b.split)
    }

    pub fn is_leaf(&self) -> bool {
        self.branch.is_none()
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }
}

/// Most frequent label of `q`; ties go to the smallest label.
pub fn forecast(q: &DataSubset<'_>) -> Result<usize> {
    if q.is_empty() {
        return Err(Error::EmptySubset);
    }
    let counts = q.class_counts();
    let mut best = 0;
    for (label, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = label;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    n_features: usize,
}

impl Tree {
    /// Single-leaf tree over `n_features` attributes.
    pub fn new(root: TreeNode, n_features: usize) -> Self {
        Tree {
            nodes: vec![root],
            n_features,
        }
    }

    /// Single leaf holding all of `data`.
    pub fn root_of(data: &Dataset) -> Result<Self> {
        Ok(Tree::new(
            TreeNode::from_subset(data.all())?,
            data.n_features(),
        ))
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// The same tree over `n_features` attributes, which must cover every
    /// attribute the tree splits on.
    pub fn with_n_features(mut self, n_features: usize) -> Result<Self> {
        if let Some(&a) = self.used_attributes().last() {
            if a >= n_features {
                return Err(Error::AttributeOutOfRange {
                    attribute: a,
                    available: n_features,
                });
            }
        }
        self.n_features = n_features;
        Ok(self)
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn leaves(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes().filter(|(_, n)| n.is_leaf())
    }

    /// The training rows held by node `id`, as a subset of `data`.
    pub fn subset_of<'d>(&'d self, data: &'d Dataset, id: NodeId) -> DataSubset<'d> {
        DataSubset::borrowed(data, &self.nodes[id.0].rows)
    }

    /// Turns leaf `at` into an internal node with the given children.
    pub fn grow(
        &mut self,
        at: NodeId,
        split: Split,
        left: TreeNode,
        right: TreeNode,
    ) -> Result<(NodeId, NodeId)> {
        if split.feature >= self.n_features {
            return Err(Error::AttributeOutOfRange {
                attribute: split.feature,
                available: self.n_features,
            });
        }
        if !split.threshold.is_finite() {
            return Err(Error::NonFiniteInput(split.threshold));
        }
        let node = self
            .nodes
            .get(at.0)
            .ok_or(Error::InvalidConfig(format!("no node {}", at.0)))?;
        if !node.is_leaf() {
            return Err(Error::InvalidConfig(format!("node {} is not a leaf", at.0)));
        }
        let l = NodeId(self.nodes.len());
        let r = NodeId(self.nodes.len() + 1);
        self.nodes.push(left);
        self.nodes.push(right);
        self.nodes[at.0].branch = Some(Branch {
            split,
            left: l,
            right: r,
        });
        Ok((l, r))
    }

    /// Splits the rows held by leaf `at` and grows children predicting the
    /// majority class of each side.
    pub fn grow_with_data(
        &mut self,
        data: &Dataset,
        at: NodeId,
        split: Split,
    ) -> Result<(NodeId, NodeId)> {
        let (l, r) = self.children_for(data, at, split)?;
        self.grow(at, split, l, r)
    }

    pub(crate) fn children_for(
        &self,
        data: &Dataset,
        at: NodeId,
        split: Split,
    ) -> Result<(TreeNode, TreeNode)> {
        let q = DataSubset::borrowed(data, &self.nodes[at.0].rows);
        let (l, r) = partition(&q, split);
        if l.is_empty() || r.is_empty() {
            return Err(Error::DegenerateSplit {
                feature: split.feature,
                threshold: split.threshold,
            });
        }
        Ok((
            TreeNode::from_subset(DataSubset::owned(data, l))?,
            TreeNode::from_subset(DataSubset::owned(data, r))?,
        ))
    }

    /// Reverts the most recent [`grow`](Self::grow) at `at`, returning the
    /// detached children.
    pub(crate) fn undo_grow(&mut self, at: NodeId) -> (TreeNode, TreeNode) {
        let branch = self.nodes[at.0].branch.take().expect("node was grown");
        debug_assert_eq!(branch.right.0 + 1, self.nodes.len());
        debug_assert_eq!(branch.left.0 + 2, self.nodes.len());
        let right = self.nodes.pop().expect("right child");
        let left = self.nodes.pop().expect("left child");
        (left, right)
    }

    fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut node = &self.nodes[0];
        while let Some(b) = node.branch {
            node = &self.nodes[if b.split.goes_left(x) {
                b.left.0
            } else {
                b.right.0
            }];
        }
        node
    }

    /// Class of the leaf reached by `x`: left when `x[j] <= threshold`.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        if let Some(&v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(v));
        }
        Ok(self.leaf_for(x).class)
    }

    fn check_width(&self, data: &Dataset) -> Result<()> {
        if data.n_features() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: data.n_features(),
            });
        }
        Ok(())
    }

    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<usize>> {
        self.check_width(data)?;
        Ok(data.rows().map(|x| self.leaf_for(x).class).collect())
    }

    /// Rows of `data` the tree gets wrong.
    pub fn misclassified<'a>(&self, data: &'a Dataset) -> Result<DataSubset<'a>> {
        self.check_width(data)?;
        let rows = data
            .rows()
            .enumerate()
            .filter(|(i, x)| self.leaf_for(x).class != data.label(*i))
            .map(|(i, _)| i)
            .collect();
        Ok(DataSubset::owned(data, rows))
    }

    /// Fraction of rows of `data` predicted correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let wrong = self.misclassified(data)?.len();
        let n = data.n_rows();
        Ok(1.0 - wrong as f64 / n as f64)
    }

    /// Total number of nodes, internal and leaf.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_leaf()).count()
    }

    /// Edges on the longest root-to-leaf path; a lone leaf has depth 0.
    pub fn max_depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(NodeId::ROOT, 0)];
        while let Some((id, depth)) = stack.pop() {
            deepest = deepest.max(depth);
            if let Some(b) = self.nodes[id.0].branch {
                stack.push((b.left, depth + 1));
                stack.push((b.right, depth + 1));
            }
        }
        deepest
    }

    /// Attribute indices tested anywhere in the tree, ascending.
    pub fn used_attributes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| n.split().map(|s| s.feature))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Renders the tree in its text form.
    pub fn serialize(&self) -> String {
        let attrs: Vec<String> = self
            .used_attributes()
            .iter()
            .map(|j| format!("X{}", j + 1))
            .collect();
        let mut out = format!("def tree{{{}}}:\n", attrs.join(","));
        self.write_node(&mut out, NodeId::ROOT, 1);
        out
    }

    fn write_node(&self, out: &mut String, id: NodeId, level: usize) {
        let pad = "    ".repeat(level);
        let node = &self.nodes[id.0];
        match node.branch {
            None => {
                let _ = writeln!(out, "{pad}return {}", node.class);
            }
            Some(b) => {
                let _ = writeln!(
                    out,
                    "{pad}if X{} <= {}:",
                    b.split.feature + 1,
                    format_real(b.split.threshold)
                );
                self.write_node(out, b.left, level + 1);
                let _ = writeln!(out, "{pad}else:");
                self.write_node(out, b.right, level + 1);
            }
        }
    }

    /// Structural equality ignoring the training rows held by nodes.
    pub fn same_structure(&self, other: &Tree) -> bool {
        fn walk(a: &Tree, ia: NodeId, b: &Tree, ib: NodeId) -> bool {
            let (na, nb) = (a.node(ia), b.node(ib));
            match (na.branch, nb.branch) {
                (None, None) => na.class == nb.class,
                (Some(x), Some(y)) => {
                    x.split == y.split && walk(a, x.left, b, y.left) && walk(a, x.right, b, y.right)
                }
                _ => false,
            }
        }
        self.n_features == other.n_features && walk(self, NodeId::ROOT, other, NodeId::ROOT)
    }
}
