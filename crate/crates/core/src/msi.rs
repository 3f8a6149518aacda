//! Minimum Surfeit and Inaccuracy tree growth.
//!
//! Starting from a single leaf, every iteration tentatively splits each
//! candidate leaf with its best entropy split, costs the whole resulting
//! tree, and commits the single growth with the lowest cost, provided it is
//! strictly lower than the current tree's. Growth stops when no candidate
//! improves the cost or no candidate is left. There are no tuning knobs:
//! the compressor and combiner only choose how cost is measured.

use std::fmt::Write as _;

use crate::complexity::{CombinerKind, CompressorKind, CostBreakdown, CostModel};
use crate::data::{format_real, Dataset};
use crate::error::Result;
use crate::split::{best_split, Split};
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MsiConfig {
    pub compressor: CompressorKind,
    pub combiner: CombinerKind,
}

impl MsiConfig {
    pub fn new(compressor: CompressorKind, combiner: CombinerKind) -> Self {
        MsiConfig {
            compressor,
            combiner,
        }
    }
}

/// One committed growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthStep {
    pub iteration: usize,
    pub leaf: NodeId,
    pub split: Split,
    pub before: CostBreakdown,
    pub after: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTrace {
    pub initial: CostBreakdown,
    pub steps: Vec<GrowthStep>,
    /// Number of tentative growths costed, accepted or not.
    pub evaluations: usize,
}

impl GrowthTrace {
    pub fn final_cost(&self) -> CostBreakdown {
        self.steps.last().map_or(self.initial, |s| s.after)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "iteration,leaf,feature,threshold,inaccuracy_before,surfeit_before,cost_before,inaccuracy_after,surfeit_after,cost_after\n",
        );
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                s.iteration,
                s.leaf.index(),
                s.split.feature,
                format_real(s.split.threshold),
                s.before.inaccuracy,
                s.before.surfeit,
                s.before.combined,
                s.after.inaccuracy,
                s.after.surfeit,
                s.after.combined,
            );
        }
        out
    }
}

/// Step-by-step growth state. [`build_tree`] drives it to completion.
pub struct Grower<'a> {
    data: &'a Dataset,
    cost: CostModel<'a>,
    tree: Tree,
    /// Leaves still eligible to grow, in insertion order, with their best split.
    candidates: Vec<(NodeId, Split)>,
    current: CostBreakdown,
    trace: GrowthTrace,
}

impl<'a> Grower<'a> {
    pub fn new(data: &'a Dataset, cfg: MsiConfig) -> Result<Self> {
        let mut cost = CostModel::new(cfg.compressor, cfg.combiner, data)?;
        let tree = Tree::root_of(data)?;
        let current = cost.cost(&tree)?;
        let mut g = Grower {
            data,
            cost,
            tree,
            candidates: Vec::new(),
            current,
            trace: GrowthTrace {
                initial: current,
                steps: Vec::new(),
                evaluations: 0,
            },
        };
        g.enqueue(NodeId::ROOT);
        Ok(g)
    }

    /// Adds `leaf` as a candidate unless it has no split.
    fn enqueue(&mut self, leaf: NodeId) {
        let q = self.tree.subset_of(self.data, leaf);
        if let Some(split) = best_split(&q) {
            self.candidates.push((leaf, split));
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn current_cost(&self) -> CostBreakdown {
        self.current
    }

    pub fn candidates(&self) -> &[(NodeId, Split)] {
        &self.candidates
    }

    /// Cost of the tree with `leaf` grown by `split`. The tree is restored
    /// before returning.
    pub fn evaluate(&mut self, leaf: NodeId, split: Split) -> Result<CostBreakdown> {
        let (l, r) = self.tree.children_for(self.data, leaf, split)?;
        self.tree.grow(leaf, split, l, r)?;
        let cost = self.cost.cost(&self.tree);
        self.tree.undo_grow(leaf);
        self.trace.evaluations += 1;
        cost
    }

    /// Runs one iteration. Returns the committed growth, or `None` once no
    /// candidate strictly lowers the cost.
    pub fn step(&mut self) -> Result<Option<GrowthStep>> {
        let mut best: Option<(usize, CostBreakdown)> = None;
        let mut best_cost = self.current.combined;
        for i in 0..self.candidates.len() {
            let (leaf, split) = self.candidates[i];
            let c = self.evaluate(leaf, split)?;
            if c.combined < best_cost {
                best_cost = c.combined;
                best = Some((i, c));
            }
        }
        let Some((i, after)) = best else {
            return Ok(None);
        };
        let (leaf, split) = self.candidates.remove(i);
        let (l, r) = self.tree.grow_with_data(self.data, leaf, split)?;
        self.enqueue(l);
        self.enqueue(r);
        let step = GrowthStep {
            iteration: self.trace.steps.len() + 1,
            leaf,
            split,
            before: self.current,
            after,
        };
        self.current = after;
        self.trace.steps.push(step);
        Ok(Some(step))
    }

    pub fn finish(self) -> (Tree, GrowthTrace) {
        (self.tree, self.trace)
    }
}

/// Grows a tree on `data` until no single growth lowers its cost.
pub fn build_tree(data: &Dataset, cfg: MsiConfig) -> Result<(Tree, GrowthTrace)> {
    let mut g = Grower::new(data, cfg)?;
    while !g.candidates.is_empty() && g.step()?.is_some() {}
    Ok(g.finish())
}

pub fn cost_of(tree: &Tree, data: &Dataset, cfg: MsiConfig) -> Result<CostBreakdown> {
    crate::complexity::tree_cost(cfg.compressor, cfg.combiner, tree, data)
}
