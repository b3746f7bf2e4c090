//! Group orbit optimization.
//!
//! Matrix and tensor decompositions are recovered by minimizing a sparsifying
//! cost over the orbit of the data under a matrix group. Groups are reached
//! through a Lie-algebra chart followed by the matrix exponential, and the
//! resulting unconstrained problems are solved with multi-start Nelder-Mead.

pub mod costs;
pub mod decomposer;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod optimizer;
pub mod pointcloud;
pub mod tensor_goo;

pub use costs::{CostSpec, MaskSpec};
pub use decomposer::{recover, DecompositionKind, DecompositionResult};
pub use error::{GooError, Result};
pub use groups::{GroupElement, GroupKind, GroupSpec, OrbitAction, RightOp};
pub use linalg::{Matrix, Scalar, Tensor};
pub use optimizer::{NmOptions, OptResult};

/// Version string embedded in every serialized artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
