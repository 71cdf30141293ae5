//! Run configuration for the `bench` tool: defaults, an optional TOML file,
//! and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use h2dist_core::geometry::{DEFAULT_DENSE_LIMIT, MAX_SPHERE_LEVEL};
use h2dist_core::h2::H2Params;
use h2dist_core::shared::FanOut;

use crate::BenchError;

/// Meshes above this level need `allow_large`.
pub const LARGE_LEVEL: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Dense,
    H2,
    Distributed,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    Laplace,
    Helmholtz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FanOutChoice {
    PointToPoint,
    Collective,
}

impl From<FanOutChoice> for FanOut {
    fn from(f: FanOutChoice) -> Self {
        match f {
            FanOutChoice::PointToPoint => FanOut::PointToPoint,
            FanOutChoice::Collective => FanOut::Collective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub level: u32,
    pub kernel: KernelChoice,
    /// Wavenumber, used by the Helmholtz kernel only.
    pub kappa: f64,
    pub m: usize,
    pub eta: f64,
    pub leaf_limit: usize,
    pub p: usize,
    pub variant: Variant,
    pub fan_out: FanOutChoice,
    pub seed: u64,
    /// Random vectors multiplied and compared against the oracles.
    pub vectors: usize,
    /// Timed repetitions of setup and multiplication; the median is reported.
    pub repeats: usize,
    pub verify_dense: bool,
    pub verify_sequential: bool,
    pub dense_tol: f64,
    pub sequential_tol: f64,
    /// Threads for matrix assembly; the global rayon pool when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub allow_large: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let h2 = H2Params::default();
        Self {
            level: 2,
            kernel: KernelChoice::Laplace,
            kappa: 1.0,
            m: h2.order,
            eta: h2.eta,
            leaf_limit: h2.leaf_limit,
            p: 1,
            variant: Variant::H2,
            fan_out: FanOutChoice::PointToPoint,
            seed: 0,
            vectors: 10,
            repeats: 3,
            verify_dense: false,
            verify_sequential: false,
            dense_tol: 1e-3,
            sequential_tol: 1e-12,
            threads: None,
            allow_large: false,
        }
    }
}

fn usage(msg: impl Into<String>) -> BenchError {
    BenchError::Usage(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| usage(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn params(&self) -> H2Params {
        H2Params {
            order: self.m,
            eta: self.eta,
            leaf_limit: self.leaf_limit,
            ..H2Params::default()
        }
    }

    /// Basis functions on the sphere of this level.
    pub fn n(&self) -> usize {
        8usize << (2 * self.level)
    }

    pub fn dense_limit(&self) -> usize {
        if self.allow_large {
            usize::MAX
        } else {
            DEFAULT_DENSE_LIMIT
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.level > MAX_SPHERE_LEVEL {
            return Err(usage(format!("level must be at most {MAX_SPHERE_LEVEL}")));
        }
        if self.level > LARGE_LEVEL && !self.allow_large {
            return Err(usage(format!(
                "level {} has {} triangles; pass --allow-large to run it",
                self.level,
                self.n()
            )));
        }
        self.params().validate().map_err(|e| usage(e.to_string()))?;
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(usage("kappa must be finite and non-negative"));
        }
        if self.p == 0 || self.p > self.n() {
            return Err(usage(format!("p must lie in 1..={}", self.n())));
        }
        if self.p > 1 && matches!(self.variant, Variant::Dense | Variant::H2) {
            return Err(usage("p > 1 needs the distributed or shared variant"));
        }
        if self.vectors == 0 {
            return Err(usage("at least one vector is needed"));
        }
        if self.repeats < 3 {
            return Err(usage("timings need at least 3 repeats"));
        }
        if self.threads == Some(0) {
            return Err(usage("threads must be positive"));
        }
        for (name, tol) in [("dense-tol", self.dense_tol), ("sequential-tol", self.sequential_tol)] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(usage(format!("{name} must be positive")));
            }
        }
        if self.verify_sequential && matches!(self.variant, Variant::Dense | Variant::H2) {
            return Err(usage("--verify-sequential needs the distributed or shared variant"));
        }
        if self.verify_dense && self.variant == Variant::Dense {
            return Err(usage("--verify-dense compares a compressed variant against the dense matrix"));
        }
        if (self.verify_dense || self.variant == Variant::Dense) && self.n() > self.dense_limit() {
            return Err(usage(format!(
                "the dense matrix of level {} exceeds {} rows; pass --allow-large",
                self.level, DEFAULT_DENSE_LIMIT
            )));
        }
        Ok(())
    }
}
