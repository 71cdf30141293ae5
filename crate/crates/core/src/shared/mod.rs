//! Shared cluster trees: the local trees of all nodes are joined by a small
//! tree of shared clusters, each held by a set of shareholders and managed
//! by the smallest of them. Block trees are built over the shared trees, so
//! a node only stores blocks it takes part in.

mod build;
mod catalog;
mod mvm;
mod oracle;
mod setup;
mod top;

pub use build::{build_shared, FanOut, SharedBlock, SharedSkeleton, Vertex};
pub use catalog::{Catalog, CatalogEntry};
pub use mvm::{backward_shared, forward_shared, mvm_shared, mvm_shared_acc, SharedCoefficients};
pub use oracle::{check_shared_mirrors, check_shareholders, gather_shared_headers, glue_shared};
pub use setup::{setup_shared, shared_transfers, SharedH2};
pub use top::{build_shared_tree, SharedCluster, SharedTree, TopNode, TopTree};
