//! Distributed H²-matrix compression of Galerkin boundary element matrices.
//!
//! The crate is `no_std` with `alloc`. Everything that needs threads, files or
//! a clock lives in the `h2dist` companion crate; the distributed algorithms
//! here only talk to a [`transport::Transport`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clustering;
pub mod distributed;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod h2;
pub mod linalg;
pub mod math;
pub mod scalar;
pub mod shared;
pub mod transport;
pub mod wire;

pub use error::{Error, ProtocolError, Result};
pub use scalar::Scalar;
