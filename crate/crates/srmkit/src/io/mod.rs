//! File formats and artifact serialization: activity/RSM matrices (binary
//! and CSV), activation manifests, fitted-model directories, and
//! self-describing JSON reports.

mod manifest;
mod matrix;
mod model;
mod report;

pub use manifest::{ingest_activations, parse_manifest, ManifestEntry};
pub use matrix::{read_matrix, write_matrix, MatrixFormat};
pub use model::{load_model, save_model};
pub(crate) use model::sanitize;
pub use report::{MetricEntry, PairRecord, Provenance, Report, RunRecord};

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::Result;

/// Write `bytes` to `path` atomically: the payload lands in a sibling
/// temporary file first and is renamed into place, so readers never observe
/// a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
