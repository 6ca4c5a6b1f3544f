//! Toolkit for aligning activity patterns recorded from multiple networks.
//!
//! Given per-network matrices whose columns are activity patterns over the
//! same stimuli, the crate fits a shared response model: one orthonormal
//! transform per network plus a single shared pattern matrix that all
//! networks map onto. On top of that it provides representational
//! similarity matrices for measuring alignment, a synthetic-recovery
//! simulation harness, bootstrap statistics, and binary/CSV matrix I/O.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability (fitting, shared-space construction, RSM comparison,
//! recovery simulation, bootstrap CIs). The `srmkit` binary exposes the
//! same pipelines as subcommands for scripted use.

pub mod cli;
pub mod consts;
pub mod error;
pub mod io;
pub mod mat;
pub mod rsm;
pub mod sim;
pub mod srm;
pub mod stats;

pub use error::{Error, Result};
pub use mat::{
    frobenius_norm, max_abs_diff, normalize_columns, orthonormality_error, qr, random_orthogonal,
    random_permutation, standardize_columns, thin_svd, Matrix, ThinSvd,
};
