//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite")]
    InvalidMatrix { row: usize, col: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("requested rank {requested} exceeds min(rows, cols) = {max}")]
    RankTooLarge { requested: usize, max: usize },

    #[error("column {col} is degenerate: {reason}")]
    DegenerateColumn { col: usize, reason: String },

    #[error("example counts differ: {left} vs {right}{context}")]
    ExampleCountMismatch {
        left: usize,
        right: usize,
        context: String,
    },

    #[error("expected a nonempty list")]
    EmptyList,

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("cannot mix within- and inter-network RSMs here")]
    KindMismatch,

    #[error("vector has zero variance; correlation is undefined")]
    ZeroVariance,

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },

    #[error("shared dimension k = {k} exceeds the limit {max} ({what})")]
    KTooLarge { k: usize, max: usize, what: String },

    #[error("need at least two networks, got {got}")]
    TooFewNetworks { got: usize },

    #[error("within-network RSMs differ by {max_abs_diff:.3e} (tolerance {tol:.1e}); inputs do not share a representational geometry")]
    RsmMismatch { max_abs_diff: f64, tol: f64 },

    #[error("singular-value gap {gap:.3e} below {tol:.1e} of the spectrum scale; the shared factorization is not unique")]
    DegenerateSpectrum { gap: f64, tol: f64 },

    #[error("network count mismatch: model has {model}, input has {input}")]
    NetworkCountMismatch { model: usize, input: usize },

    #[error("{path}: bad magic or unsupported version (expected AMAT v1)")]
    BadMagic { path: PathBuf },

    #[error("{path}: payload holds {got} values but header declares {expected}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        got: usize,
    },

    #[error("{path}:{line}: cell {col} is not numeric: {text:?}")]
    NonNumericCell {
        path: PathBuf,
        line: usize,
        col: usize,
        text: String,
    },

    #[error("{path}:{line}: row has {got} cells, expected {expected}")]
    DimMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("manifest entry ({network}, {layer}) points to a missing file: {path}")]
    MissingFile {
        network: String,
        layer: String,
        path: PathBuf,
    },

    #[error("duplicate manifest entry for network {network:?}, layer {layer:?}")]
    DuplicateEntry { network: String, layer: String },

    #[error("{path}:{line}: {msg}")]
    ManifestParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("empty input: need at least one sample")]
    EmptyInput,

    #[error("confidence level must lie in (0, 1), got {0}")]
    BadCiLevel(f64),

    #[error("model directory is malformed: {0}")]
    ModelFormat(String),

    #[error("simulation run {run} failed: {source}")]
    RunFailed {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Wrap with a human-readable context prefix (e.g. the network id being
    /// processed when a numerical error surfaces).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by malformed input (files, flags, shapes) as
    /// opposed to numerical failures discovered mid-computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::DegenerateColumn { .. }
            | Error::ZeroVariance
            | Error::RsmMismatch { .. }
            | Error::DegenerateSpectrum { .. } => false,
            Error::RunFailed { source, .. } | Error::Context { source, .. } => {
                source.is_validation()
            }
            _ => true,
        }
    }
}
