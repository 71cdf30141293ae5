//! Cluster trees, the admissibility condition and block trees.

mod aabb;
mod block;
mod tree;

pub use aabb::Aabb;
pub use block::{check_cover, child_pairs, is_admissible, BlockNode, BlockStatus, BlockTree};
pub use tree::{Cluster, ClusterTree, TreeView, DEFAULT_LEAF_LIMIT};
