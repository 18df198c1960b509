//! Versioned TOML model files for the conformal calibration and the envelope.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so reading a
//! file back reproduces every number exactly. Calibration scores are stored
//! run-length encoded because each context has at most nine distinct values.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{read_text, write_text};
use crate::chsh::Context;
use crate::conformal::{CalibrationSet, ConformalScorer, LhvConditionalModel};
use crate::error::{Result, TaraError};
use crate::tara_k::{EnvelopeModel, FeatureSubset, Standardization};

pub const SCHEMA_VERSION: u32 = 1;

/// Conformal scorer plus the LHV p-values the two-sample KS branch compares against.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    pub scorer: ConformalScorer<f64>,
    pub reference_pvalues: Vec<f64>,
}

/// Envelope and the feature columns it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeArtifact {
    pub subset: FeatureSubset,
    pub envelope: EnvelopeModel<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    schema_version: u32,
    kind: String,
    conformal: ConformalSection,
    calibration: CalibrationSection,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConformalSection {
    pseudo_count: f64,
    tables: BTreeMap<String, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationSection {
    reference_pvalues: Vec<f64>,
    scores: BTreeMap<String, RunLength>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunLength {
    values: Vec<f64>,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeFile {
    schema_version: u32,
    kind: String,
    subset: String,
    target_fpr: f64,
    threshold: f64,
    ridge: f64,
    location: Vec<f64>,
    scale: Vec<f64>,
    center: Vec<f64>,
    /// Row-major.
    precision: Vec<f64>,
}

fn schema(msg: impl Into<String>) -> TaraError {
    TaraError::Schema(msg.into())
}

fn check_header(version: u32, kind: &str, expected: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(schema(format!("unsupported schema_version {version}")));
    }
    if kind != expected {
        return Err(schema(format!("expected kind `{expected}`, found `{kind}`")));
    }
    Ok(())
}

fn run_length(sorted: &[f64]) -> RunLength {
    let mut values = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for s in sorted {
        if values.last() == Some(s) {
            *counts.last_mut().expect("parallel vectors") += 1;
        } else {
            values.push(*s);
            counts.push(1);
        }
    }
    RunLength { values, counts }
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| schema(e.message().to_string()))
}

fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| schema(e.to_string()))
}

impl CalibrationModel {
    pub fn to_toml(&self) -> Result<String> {
        let model = &self.scorer.model;
        let cal = &self.scorer.calibration;
        let file = CalibrationFile {
            schema_version: SCHEMA_VERSION,
            kind: "calibration".into(),
            conformal: ConformalSection {
                pseudo_count: model.pseudo_count(),
                tables: Context::ALL.iter().map(|c| (c.to_string(), model.table(*c).to_vec())).collect(),
            },
            calibration: CalibrationSection {
                reference_pvalues: self.reference_pvalues.clone(),
                scores: Context::ALL.iter().map(|c| (c.to_string(), run_length(cal.scores(*c)))).collect(),
            },
        };
        to_toml(&file)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: CalibrationFile = parse_toml(text)?;
        check_header(file.schema_version, &file.kind, "calibration")?;
        let mut tables = [[0.0; 9]; 4];
        let mut scores: [Vec<f64>; 4] = Default::default();
        for c in Context::ALL {
            let key = c.to_string();
            let t = file.conformal.tables.get(&key).ok_or_else(|| schema(format!("missing table {key}")))?;
            if t.len() != 9 {
                return Err(schema(format!("table {key} needs 9 entries, found {}", t.len())));
            }
            tables[c.index()].copy_from_slice(t);
            let rl = file.calibration.scores.get(&key).ok_or_else(|| schema(format!("missing scores {key}")))?;
            if rl.values.len() != rl.counts.len() {
                return Err(schema(format!("scores {key}: values and counts differ in length")));
            }
            for (v, n) in rl.values.iter().zip(&rl.counts) {
                scores[c.index()].extend(std::iter::repeat_n(*v, *n as usize));
            }
        }
        if file.conformal.tables.len() != 4 || file.calibration.scores.len() != 4 {
            return Err(schema("unexpected context keys"));
        }
        if file.calibration.reference_pvalues.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(schema("reference p-values must lie in (0,1]"));
        }
        let model = LhvConditionalModel::from_tables(tables, file.conformal.pseudo_count)?;
        let calibration = CalibrationSet::from_scores(scores)?;
        Ok(CalibrationModel {
            scorer: ConformalScorer::new(model, calibration),
            reference_pvalues: file.calibration.reference_pvalues,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_toml()?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&read_text(path.as_ref())?)
    }
}

impl EnvelopeArtifact {
    pub fn to_toml(&self) -> Result<String> {
        let e = &self.envelope;
        to_toml(&EnvelopeFile {
            schema_version: SCHEMA_VERSION,
            kind: "envelope".into(),
            subset: self.subset.name().into(),
            target_fpr: e.target_fpr,
            threshold: e.threshold,
            ridge: e.ridge,
            location: e.standardization.location.clone(),
            scale: e.standardization.scale.clone(),
            center: e.center.clone(),
            precision: e.precision.clone(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let f: EnvelopeFile = parse_toml(text)?;
        check_header(f.schema_version, &f.kind, "envelope")?;
        let subset = FeatureSubset::parse(&f.subset).ok_or_else(|| schema(format!("unknown subset `{}`", f.subset)))?;
        if f.center.len() != subset.indices().len() {
            return Err(schema(format!("subset {subset} needs {} dimensions", subset.indices().len())));
        }
        let envelope = EnvelopeModel::from_parts(
            Standardization { location: f.location, scale: f.scale },
            f.center,
            f.precision,
            f.threshold,
            f.ridge,
            f.target_fpr,
        )?;
        Ok(EnvelopeArtifact { subset, envelope })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_toml()?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&read_text(path.as_ref())?)
    }
}
