//! Sphere meshes, kernels and piecewise-constant Galerkin entries.

mod galerkin;
mod kernel;
mod mesh;
mod quadrature;

pub use galerkin::{
    assemble_dense, classify_pair, galerkin_entry, galerkin_entry_between, pair_integral, PairKind,
    DEFAULT_DENSE_LIMIT,
};
pub use kernel::{Helmholtz, Kernel, KernelSpec, Laplace};
pub use mesh::{Triangle, TriangleMesh, MAX_SPHERE_LEVEL};
pub use quadrature::{TriangleQuadRule, DEFAULT_RULE_ORDER};
