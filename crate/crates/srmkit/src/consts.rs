//! Central numerical tolerances and defaults.
//!
//! Tolerances sit roughly 100–1000x above machine epsilon scaled by the
//! problem sizes this crate targets (dense matrices up to ~512x512), so
//! they hold across platforms without being loose enough to mask bugs.

/// Max-abs orthogonality error allowed for sampled orthogonal matrices,
/// `||Q^T Q - I||_max`.
pub const ORTHOGONAL_SAMPLE_TOL: f64 = 1e-12;

/// Max-abs orthonormality error allowed for SVD factors (`U^T U`, `V V^T`).
pub const SVD_FACTOR_TOL: f64 = 1e-10;

/// Relative Frobenius reconstruction error allowed for a full-rank thin SVD.
pub const SVD_RECONSTRUCTION_RTOL: f64 = 1e-8;

/// Idempotence tolerance for column standardization / normalization.
pub const STANDARDIZE_IDEMPOTENCE_TOL: f64 = 1e-12;

/// Symmetry, unit-diagonal, and entry-range slack for within-network RSMs.
pub const RSM_TOL: f64 = 1e-10;

/// Max-abs orthonormality error allowed for fitted SRM transforms,
/// `||W^T W - I_k||_max`.
pub const SRM_TRANSFORM_TOL: f64 = 1e-8;

/// Absolute slack allowed for non-monotone steps in an SRM fit trace.
pub const FIT_TRACE_SLACK: f64 = 1e-10;

/// Max-abs RSM difference accepted by the equal-RSM factorization builder.
pub const RSM_EQUALITY_TOL: f64 = 1e-8;

/// Relative Frobenius reconstruction error allowed for the equal-RSM
/// factorization (`W_a S` vs the normalized input).
pub const SVD_CONSTRUCTION_RTOL: f64 = 1e-6;

/// Minimum gap between consecutive singular values, relative to the largest,
/// below which the equal-RSM construction is reported as non-unique.
pub const SPECTRUM_GAP_RTOL: f64 = 1e-8;

/// A column whose (centered, for standardization) Euclidean norm falls at or
/// below this multiple of its raw magnitude is treated as degenerate.
pub const DEGENERATE_COLUMN_RTOL: f64 = 1e-13;

/// Default relative-objective-change convergence threshold for SRM fits.
pub const DEFAULT_FIT_TOL: f64 = 1e-9;

/// Default iteration cap for SRM fits.
pub const DEFAULT_MAX_ITERS: usize = 200;

/// Default bootstrap resample count.
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 10_000;

/// Default bootstrap confidence level.
pub const DEFAULT_CI_LEVEL: f64 = 0.95;
