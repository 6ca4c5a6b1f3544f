//! Fitted-model directories.
//!
//! A model serializes to a directory holding one binary matrix file per
//! transform (`w000_<network>.amat`, ...), the shared matrix
//! (`shared.amat`), and `metadata.json` with everything else (k, ids,
//! scaling policy, tolerance, trace, convergence). Loading re-validates the
//! orthonormality invariant, so a corrupted or hand-edited model cannot
//! silently enter a pipeline.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::consts;
use crate::error::{Error, Result};
use crate::mat::orthonormality_error;
use crate::srm::SrmModel;

use super::{read_matrix, write_matrix, MatrixFormat};

const METADATA_FILE: &str = "metadata.json";
const SHARED_FILE: &str = "shared.amat";

#[derive(Serialize, Deserialize)]
struct ModelMetadata {
    schema_version: u32,
    k: usize,
    layer_id: String,
    network_ids: Vec<String>,
    normalization: String,
    tol: f64,
    iterations: usize,
    converged: bool,
    final_objective: f64,
    fit_trace: Vec<f64>,
    warnings: Vec<String>,
    transform_files: Vec<String>,
    shared_file: String,
}

/// Keep ids readable in file names without trusting them as paths.
pub(crate) fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Write `model` into `dir` (created if needed).
pub fn save_model(model: &SrmModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut transform_files = Vec::with_capacity(model.transforms.len());
    for (i, (w, id)) in model.transforms.iter().zip(&model.network_ids).enumerate() {
        let name = format!("w{i:03}_{}.amat", sanitize(id));
        write_matrix(w, &dir.join(&name), MatrixFormat::Binary)?;
        transform_files.push(name);
    }
    write_matrix(&model.shared, &dir.join(SHARED_FILE), MatrixFormat::Binary)?;
    let meta = ModelMetadata {
        schema_version: super::report::SCHEMA_VERSION,
        k: model.k,
        layer_id: model.layer_id.clone(),
        network_ids: model.network_ids.clone(),
        normalization: model.normalization.clone(),
        tol: model.tol,
        iterations: model.iterations,
        converged: model.converged,
        final_objective: model.final_objective(),
        fit_trace: model.fit_trace.clone(),
        warnings: model.warnings.clone(),
        transform_files,
        shared_file: SHARED_FILE.into(),
    };
    let text = serde_json::to_string_pretty(&meta).expect("metadata serialization cannot fail");
    super::write_atomic(&dir.join(METADATA_FILE), (text + "\n").as_bytes())
}

/// Load a model directory, re-validating shapes and the orthonormality
/// invariant of every transform.
pub fn load_model(dir: &Path) -> Result<SrmModel> {
    let meta_path = dir.join(METADATA_FILE);
    let text = fs::read_to_string(&meta_path)?;
    let meta: ModelMetadata = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: meta_path,
        source,
    })?;
    if meta.schema_version != super::report::SCHEMA_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported schema version {}",
            meta.schema_version
        )));
    }
    if meta.transform_files.len() != meta.network_ids.len() {
        return Err(Error::ModelFormat(format!(
            "{} transform files for {} networks",
            meta.transform_files.len(),
            meta.network_ids.len()
        )));
    }
    if meta.fit_trace.is_empty() {
        return Err(Error::ModelFormat("empty fit trace".into()));
    }

    let mut transforms = Vec::with_capacity(meta.transform_files.len());
    for (name, id) in meta.transform_files.iter().zip(&meta.network_ids) {
        let w = read_matrix(&dir.join(name))?;
        if w.cols() != meta.k {
            return Err(Error::ModelFormat(format!(
                "transform for network {id:?} has {} columns, expected k = {}",
                w.cols(),
                meta.k
            )));
        }
        let err = orthonormality_error(&w);
        if err > consts::SRM_TRANSFORM_TOL {
            return Err(Error::ModelFormat(format!(
                "transform for network {id:?} violates orthonormality by {err:.3e}"
            )));
        }
        transforms.push(w);
    }
    let shared = read_matrix(&dir.join(&meta.shared_file))?;
    if shared.rows() != meta.k {
        return Err(Error::ModelFormat(format!(
            "shared matrix has {} rows, expected k = {}",
            shared.rows(),
            meta.k
        )));
    }

    Ok(SrmModel {
        k: meta.k,
        network_ids: meta.network_ids,
        layer_id: meta.layer_id,
        transforms,
        shared,
        fit_trace: meta.fit_trace,
        converged: meta.converged,
        iterations: meta.iterations,
        tol: meta.tol,
        normalization: meta.normalization,
        warnings: meta.warnings,
    })
}
