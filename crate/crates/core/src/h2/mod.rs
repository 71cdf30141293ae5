//! Tensor Chebyshev interpolation, H²-matrix assembly and the sequential
//! matrix-vector product.

mod basis;
mod interpolation;
mod matrix;
mod mvm;

pub use basis::{leaf_matrix, leaf_rule, transfer_matrix, ClusterBasis};
pub use interpolation::InterpolationScheme;
pub use matrix::{
    assemble_coupling, assemble_nearfield, BlockData, H2Matrix, H2Params, StorageCensus,
};
pub use mvm::{
    backward, backward_from, forward, forward_from, interaction, ColumnSource, LocalColumns,
};
