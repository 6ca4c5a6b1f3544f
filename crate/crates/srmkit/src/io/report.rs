//! Self-describing evaluation reports.
//!
//! A report is a JSON document with a fixed key order (struct order below),
//! so regenerating one from the same inputs and seed yields byte-identical
//! output except for the `generated_at_unix` wall-clock field, which
//! [`Report::canonical_string`] zeroes for comparisons. Every metric entry
//! sits next to the conventions (vectorization rule, column scaling, k)
//! that produced it, and the provenance block pins the seed and toolkit
//! version, so any published number can be replayed.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::BootstrapCi;

pub const SCHEMA_VERSION: u32 = 1;

/// One named scalar, optionally with a bootstrap confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<BootstrapCi>,
}

/// Per-run metric record from the simulation harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub shared_pearson: f64,
    pub shared_spearman: f64,
    pub native_pearson: f64,
    pub native_spearman: f64,
    pub variance_explained: f64,
}

/// Per-network-pair record from the evaluation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub left: String,
    pub right: String,
    /// Pearson correlation between the pair's within-RSMs.
    pub wrsm_consistency: f64,
    /// Pair inter-RSM vs averaged within-RSM, shared space.
    pub shared_pearson: f64,
    pub shared_spearman: f64,
    /// Pair inter-RSM vs averaged within-RSM, native space.
    pub native_pearson: f64,
    pub native_spearman: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub toolkit: String,
    pub version: String,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Provenance {
            seed,
            toolkit: "srmkit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// What produced the report: "simulation", "evaluation", "fit", ...
    pub kind: String,
    /// Wall-clock creation time; excluded from determinism comparisons.
    pub generated_at_unix: u64,
    /// Resolved input parameters, defaults included.
    pub spec_echo: BTreeMap<String, String>,
    /// The numerical conventions behind every metric below.
    pub conventions: BTreeMap<String, String>,
    pub metrics: Vec<MetricEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runs: Option<Vec<RunRecord>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pairs: Option<Vec<PairRecord>>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(kind: impl Into<String>, seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            spec_echo: BTreeMap::new(),
            conventions: BTreeMap::new(),
            metrics: Vec::new(),
            runs: None,
            pairs: None,
            provenance: Provenance::new(seed),
        }
    }

    pub fn echo(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.spec_echo.insert(key.into(), value.to_string());
        self
    }

    pub fn convention(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.conventions.insert(key.into(), value.into());
        self
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.metrics.push(MetricEntry {
            name: name.into(),
            value,
            ci: None,
        });
        self
    }

    pub fn metric_with_ci(&mut self, name: impl Into<String>, ci: BootstrapCi) -> &mut Self {
        self.metrics.push(MetricEntry {
            name: name.into(),
            value: ci.mean,
            ci: Some(ci),
        });
        self
    }

    pub fn find_metric(&self, name: &str) -> Option<&MetricEntry> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Pretty JSON with the timestamp zeroed: two reports over identical
    /// inputs and seeds compare byte-equal through this view.
    pub fn canonical_string(&self) -> String {
        let mut clone = self.clone();
        clone.generated_at_unix = 0;
        serde_json::to_string_pretty(&clone).expect("report serialization cannot fail") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        super::write_atomic(path, (text + "\n").as_bytes())
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })
    }
}
