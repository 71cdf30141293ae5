//! Block-row distribution over `p` nodes: each node builds the block trees
//! of its block row against mirrors of its peers' cluster trees, assembles
//! its rows, and takes part in the matrix-vector product.

mod build;
mod mirror;
mod mvm;
mod oracle;
mod partition;
mod setup;

pub use build::{build_block_distributed, BlockSkeleton};
pub use mirror::{header_of, MirrorNode, MirrorTree, SendNode, SendTree};
pub use mvm::{mvm_distributed, mvm_distributed_acc};
pub use oracle::{check_minimal, check_mirrors, glue_trees, owned_leaf_blocks};
pub use partition::{partition_indices, LocalPart};
pub(crate) use setup::local_geometry;
pub use setup::{setup_distributed, DistributedH2};
