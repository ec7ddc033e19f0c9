//! Exact-rational toolkit for determinant maximization.
//!
//! * [`rational`]: canonical big rationals and certified `exp`/`sqrt`.
//! * [`linalg`]: Gram matrices, fraction-free determinants, volumes.
//! * [`solvers`]: exhaustive, greedy and additive-approximate subset
//!   selection, plus orthogonal-subset search.
//! * [`gridtiling`]: toroidal Grid Tiling and binary CSP models and solvers.
//! * [`reductions`]: executable constructions mapping k-Sum and Grid Tiling
//!   instances to determinant maximization and orthogonality instances.
//! * [`format`]: the JSON documents shared by every tool in the workspace.

pub mod error;
pub mod format;
pub mod gridtiling;
pub mod linalg;
pub mod rational;
pub mod reductions;
pub mod solvers;

pub use error::{Error, Result};
pub use gridtiling::{BcspInstance, Cell, GridTilingInstance, GtAssignment};
pub use linalg::{GramMatrix, IndexSet, Provenance, RatMatrix, RatVectorSet};
pub use rational::Rat;
pub use reductions::{ArrowheadReduction, GadgetFamily, KSumInstance};
pub use solvers::DetMaxSolution;

/// Resource guards applied by the exhaustive routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Upper bound on enumerated subsets (or search states) per call.
    pub max_subsets: u64,
    /// Upper bound on the bit length of precision parameters.
    pub max_bits: u64,
}

impl Limits {
    pub const DEFAULT_MAX_SUBSETS: u64 = 50_000_000;
    pub const DEFAULT_MAX_BITS: u64 = 4096;
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_subsets: Self::DEFAULT_MAX_SUBSETS,
            max_bits: Self::DEFAULT_MAX_BITS,
        }
    }
}
