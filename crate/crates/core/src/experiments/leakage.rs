//! Same-distribution versus cross-distribution calibration.
//!
//! Both conditions score one shared test pool (quantum family `Q` against an
//! LHV family) by `1 − TARA-k`, where TARA-k is the KS distance of a dataset's
//! p-values from uniform. The same condition calibrates the conformal model on
//! fresh data from `Q`; the cross condition calibrates on `Q'`, which differs
//! in visibility and click efficiency.

use serde::{Deserialize, Serialize};

use super::family::Family;
use super::pipeline::{family_features, fit_family_scorer, shuffled, stream, test_labels};
use super::roc::{cohens_d, roc, RocResult};
use crate::conformal::ConformalScorer;
use crate::datagen::GroundTruth;
use crate::error::{Result, TaraError};

fn default_pseudo_count() -> f64 {
    crate::conformal::DEFAULT_PSEUDO_COUNT
}

fn default_set_alpha() -> f64 {
    crate::tara_k::DEFAULT_SET_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageConfig {
    pub seed: u64,
    pub trials_per_context: u64,
    /// Datasets pooled for the conformal table, and again for its calibration scores.
    pub calibration_datasets: usize,
    /// Test datasets per class.
    pub test_datasets: usize,
    #[serde(default = "default_pseudo_count")]
    pub pseudo_count: f64,
    #[serde(default = "default_set_alpha")]
    pub set_alpha: f64,
    #[serde(default)]
    pub shuffle_labels: bool,
    pub quantum: Family,
    pub quantum_cross: Family,
    pub lhv: Family,
}

impl LeakageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_context == 0 || self.calibration_datasets == 0 || self.test_datasets < 2 {
            return Err(TaraError::config("dataset counts must be positive (at least 2 test datasets)"));
        }
        self.quantum.validate()?;
        self.quantum_cross.validate()?;
        self.lhv.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub roc: RocResult<f64>,
    pub auc_se: f64,
    /// Cohen's d of the final scores, quantum minus classical.
    pub cohens_d: f64,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    pub auc_same: f64,
    pub auc_cross: f64,
    pub auc_se_same: f64,
    pub auc_se_cross: f64,
    pub cohens_d_same: f64,
    pub cohens_d_cross: f64,
    pub tpr5_same: f64,
    pub tpr5_cross: f64,
    /// `(auc_same − auc_cross) · 100`.
    pub inflation: f64,
    pub same: ConditionResult,
    pub cross: ConditionResult,
    pub labels: Vec<GroundTruth>,
}

fn condition(
    config: &LeakageConfig,
    scorer: &ConformalScorer<f64>,
    labels: &[GroundTruth],
) -> Result<ConditionResult> {
    let run = |family: &Family, stream: u64| {
        family_features(family, config.seed, stream, config.test_datasets, config.trials_per_context, scorer, config.set_alpha)
    };
    let mut scores: Vec<f64> = run(&config.lhv, stream::TEST_CLASSICAL)?
        .into_iter()
        .map(|e| 1.0 - e.features.tara_k)
        .collect();
    scores.extend(run(&config.quantum, stream::TEST_QUANTUM)?.into_iter().map(|e| 1.0 - e.features.tara_k));
    let roc = roc(&scores, labels)?;
    let (q, c): (Vec<f64>, Vec<f64>) = {
        let mut q = Vec::new();
        let mut c = Vec::new();
        for (s, l) in scores.iter().zip(labels) {
            match l {
                GroundTruth::Quantum => q.push(*s),
                GroundTruth::Classical => c.push(*s),
            }
        }
        (q, c)
    };
    let cohens_d = cohens_d(&q, &c)?;
    let auc_se = roc.auc_standard_error();
    Ok(ConditionResult { roc, auc_se, cohens_d, scores })
}

pub fn leakage_experiment(config: &LeakageConfig) -> Result<LeakageReport> {
    config.validate()?;
    let fit = |family: &Family, streams| {
        fit_family_scorer(family, config.seed, streams, config.calibration_datasets, config.trials_per_context, config.pseudo_count)
    };
    let same_scorer = fit(&config.quantum, (stream::FIT, stream::CALIBRATE))?;
    let cross_scorer = fit(&config.quantum_cross, (stream::CROSS_FIT, stream::CROSS_CALIBRATE))?;

    let mut labels = test_labels(config.test_datasets, config.test_datasets);
    if config.shuffle_labels {
        labels = shuffled(&labels, config.seed);
    }
    let same = condition(config, &same_scorer, &labels)?;
    let cross = condition(config, &cross_scorer, &labels)?;
    Ok(LeakageReport {
        auc_same: same.roc.auc,
        auc_cross: cross.roc.auc,
        auc_se_same: same.auc_se,
        auc_se_cross: cross.auc_se,
        cohens_d_same: same.cohens_d,
        cohens_d_cross: cross.cohens_d,
        tpr5_same: same.roc.tpr_at_5,
        tpr5_cross: cross.roc.tpr_at_5,
        inflation: (same.roc.auc - cross.roc.auc) * 100.0,
        same,
        cross,
        labels,
    })
}
