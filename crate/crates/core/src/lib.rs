//! Decision trees grown without hyperparameters: a tree is extended only
//! while doing so lowers a compression-estimated cost that balances how
//! much of the data the tree gets wrong against how redundant the tree
//! itself is.
//!
//! ```
//! use msi_tree::{build_tree, make_error_point_dataset, MsiConfig};
//!
//! let data = make_error_point_dataset(0);
//! let (tree, _trace) = build_tree(&data, MsiConfig::default()).unwrap();
//! assert_eq!(tree.node_count(), 3);
//! print!("{}", tree.serialize());
//! ```

pub mod baseline;
pub mod bench;
pub mod complexity;
pub mod data;
pub mod error;
pub mod model;
pub mod msi;
pub mod split;
pub mod tree;

pub use baseline::{build_greedy_tree, GreedyConfig};
pub use complexity::{
    combine, compressed_length, inaccuracy, surfeit, tree_cost, CombinerKind, CompressorKind,
    CostBreakdown,
};
pub use data::{
    load_csv, make_blobs, make_error_point_dataset, train_test_split, DataSubset, Dataset,
    LabelColumn, SplitRatio,
};
pub use error::{Error, Result};
pub use model::Model;
pub use msi::{build_tree, cost_of, GrowthStep, GrowthTrace, MsiConfig};
pub use split::{best_split, entropy, weighted_entropy, Split};
pub use tree::{NodeId, Tree, TreeNode};
