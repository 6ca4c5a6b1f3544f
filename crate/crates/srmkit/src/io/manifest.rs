//! Activation manifests: a plain-text index mapping (network, layer) pairs
//! to matrix files exported from some external recording step.
//!
//! Grammar: one entry per line, `network_id, layer_id, path`; lines whose
//! first non-blank character is `#` are comments. Relative paths resolve
//! against the manifest's own directory, so a manifest plus its matrix
//! files form a relocatable bundle.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::srm::ActivityMatrix;

/// One parsed manifest line, path already resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub network_id: String,
    pub layer_id: String,
    pub path: PathBuf,
}

/// Parse a manifest file into entries; rejects malformed lines and
/// duplicate (network, layer) pairs.
pub fn parse_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut entries = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::ManifestParse {
                path: path.into(),
                line: lineno,
                msg: format!(
                    "expected `network_id, layer_id, path` (3 fields), got {}",
                    fields.len()
                ),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::ManifestParse {
                path: path.into(),
                line: lineno,
                msg: "empty field".into(),
            });
        }
        let network_id = fields[0].to_string();
        let layer_id = fields[1].to_string();
        if !seen.insert((network_id.clone(), layer_id.clone())) {
            return Err(Error::DuplicateEntry {
                network: network_id,
                layer: layer_id,
            });
        }
        let entry_path = Path::new(fields[2]);
        let resolved = if entry_path.is_absolute() {
            entry_path.to_path_buf()
        } else {
            base.join(entry_path)
        };
        entries.push(ManifestEntry {
            network_id,
            layer_id,
            path: resolved,
        });
    }
    Ok(entries)
}

/// Load every matrix a manifest names, as [`ActivityMatrix`] values ordered
/// by (layer, network). All matrices within one layer must agree on the
/// example count m; violations name both offending files.
pub fn ingest_activations(manifest: &Path) -> Result<Vec<ActivityMatrix>> {
    let mut entries = parse_manifest(manifest)?;
    entries.sort_by(|a, b| {
        (a.layer_id.as_str(), a.network_id.as_str()).cmp(&(b.layer_id.as_str(), b.network_id.as_str()))
    });

    let mut out: Vec<ActivityMatrix> = Vec::with_capacity(entries.len());
    // example count per layer, with the file that established it
    let mut layer_m: Vec<(String, usize, PathBuf)> = Vec::new();
    for entry in &entries {
        if !entry.path.is_file() {
            return Err(Error::MissingFile {
                network: entry.network_id.clone(),
                layer: entry.layer_id.clone(),
                path: entry.path.clone(),
            });
        }
        let matrix = super::read_matrix(&entry.path)?;
        let mat = ActivityMatrix::new(&entry.network_id, &entry.layer_id, matrix)
            .map_err(|e| e.context(format!("{}", entry.path.display())))?;
        match layer_m.iter().find(|(l, _, _)| l == &entry.layer_id) {
            Some((_, m, first_path)) => {
                if mat.examples() != *m {
                    return Err(Error::ExampleCountMismatch {
                        left: *m,
                        right: mat.examples(),
                        context: format!(
                            " in layer {:?} ({} vs {})",
                            entry.layer_id,
                            first_path.display(),
                            entry.path.display()
                        ),
                    });
                }
            }
            None => {
                layer_m.push((entry.layer_id.clone(), mat.examples(), entry.path.clone()));
            }
        }
        out.push(mat);
    }
    Ok(out)
}
