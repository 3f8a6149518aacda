//! Greedy recursive partitioning with the usual size and depth limits.

use std::collections::VecDeque;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::split::best_split_with_min_leaf;
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyConfig {
    /// Nodes with fewer rows are not split.
    pub min_samples_split: usize,
    /// Splits leaving fewer rows on either side are not considered.
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            min_samples_split: 5,
            min_samples_leaf: 1,
            max_depth: None,
        }
    }
}

impl GreedyConfig {
    pub fn with_min_samples_leaf(self, min_samples_leaf: usize) -> Self {
        GreedyConfig {
            min_samples_leaf,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::InvalidConfig(
                "min_samples_split must be at least 2".into(),
            ));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidConfig(
                "min_samples_leaf must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Splits every node by its best allowed entropy split until the node is
/// pure, too small, too deep, or has no allowed split.
pub fn build_greedy_tree(data: &Dataset, cfg: GreedyConfig) -> Result<Tree> {
    cfg.validate()?;
    let mut tree = Tree::root_of(data)?;
    let mut queue = VecDeque::from([(NodeId::ROOT, 0)]);
    while let Some((id, depth)) = queue.pop_front() {
        if cfg.max_depth.is_some_and(|m| depth >= m) {
            continue;
        }
        let q = tree.subset_of(data, id);
        if q.len() < cfg.min_samples_split {
            continue;
        }
        let Some(best) = best_split_with_min_leaf(&q, cfg.min_samples_leaf) else {
            continue;
        };
        let (l, r) = tree.grow_with_data(data, id, best.split)?;
        queue.push_back((l, depth + 1));
        queue.push_back((r, depth + 1));
    }
    Ok(tree)
}
