//! Feature-subset ablation of the batch detector.

use serde::{Deserialize, Serialize};

use super::family::Family;
use super::pipeline::{family_features, fit_family_scorer, shuffled, stream, test_labels};
use super::roc::{roc, RocResult};
use crate::error::{Result, TaraError};
use crate::tara_k::{fit_envelope, EnvelopeConfig, FeatureSubset};

fn default_set_alpha() -> f64 {
    crate::tara_k::DEFAULT_SET_ALPHA
}

fn default_fpr() -> f64 {
    0.05
}

fn default_pseudo_count() -> f64 {
    crate::conformal::DEFAULT_PSEUDO_COUNT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    pub seed: u64,
    pub trials_per_context: u64,
    /// LHV datasets pooled for the conformal table, and again for its calibration scores.
    pub calibration_datasets: usize,
    /// LHV datasets whose features train each envelope.
    pub train_datasets: usize,
    /// Test datasets per class.
    pub test_datasets: usize,
    #[serde(default = "default_set_alpha")]
    pub set_alpha: f64,
    #[serde(default = "default_fpr")]
    pub target_fpr: f64,
    #[serde(default = "default_pseudo_count")]
    pub pseudo_count: f64,
    #[serde(default)]
    pub shuffle_labels: bool,
    pub lhv: Family,
    pub quantum: Family,
}

impl AblationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_context == 0 || self.calibration_datasets == 0 || self.test_datasets == 0 {
            return Err(TaraError::config("dataset counts must be positive"));
        }
        if !(self.set_alpha > 0.0 && self.set_alpha <= 1.0) {
            return Err(TaraError::config("set_alpha must lie in (0,1]"));
        }
        if !(self.target_fpr > 0.0 && self.target_fpr < 1.0) {
            return Err(TaraError::config("target_fpr must lie in (0,1)"));
        }
        self.lhv.validate()?;
        self.quantum.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub subset: FeatureSubset,
    pub roc: RocResult<f64>,
    pub auc_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationResult {
    pub rows: Vec<AblationRow>,
}

impl AblationResult {
    pub fn auc(&self, subset: FeatureSubset) -> Option<f64> {
        self.rows.iter().find(|r| r.subset == subset).map(|r| r.roc.auc)
    }

    pub fn row(&self, subset: FeatureSubset) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.subset == subset)
    }
}

/// Trains one envelope per feature subset on LHV features and scores a mixed test pool.
pub fn ablation_study(config: &AblationConfig) -> Result<AblationResult> {
    config.validate()?;
    let seed = config.seed;
    let tpc = config.trials_per_context;
    let scorer = fit_family_scorer(
        &config.lhv,
        seed,
        (stream::FIT, stream::CALIBRATE),
        config.calibration_datasets,
        tpc,
        config.pseudo_count,
    )?;
    let features = |family: &Family, stream: u64, count: usize| {
        family_features(family, seed, stream, count, tpc, &scorer, config.set_alpha)
            .map(|v| v.into_iter().map(|e| e.features).collect::<Vec<_>>())
    };
    let train = features(&config.lhv, stream::TRAIN, config.train_datasets)?;
    let mut test = features(&config.lhv, stream::TEST_CLASSICAL, config.test_datasets)?;
    test.extend(features(&config.quantum, stream::TEST_QUANTUM, config.test_datasets)?);

    let mut labels = test_labels(config.test_datasets, config.test_datasets);
    if config.shuffle_labels {
        labels = shuffled(&labels, seed);
    }
    let envelope_config = EnvelopeConfig { target_fpr: config.target_fpr, ..EnvelopeConfig::default() };

    let rows = FeatureSubset::ALL
        .into_iter()
        .map(|subset| {
            let projected: Vec<Vec<f64>> = train.iter().map(|f| f.project(subset)).collect();
            let envelope = fit_envelope(&projected, &envelope_config)?;
            let scores: Vec<f64> = test
                .iter()
                .map(|f| envelope.anomaly_score(&f.project(subset)))
                .collect::<Result<_>>()?;
            let roc = roc(&scores, &labels)?;
            let auc_se = roc.auc_standard_error();
            Ok(AblationRow { subset, roc, auc_se })
        })
        .collect::<Result<_>>()?;
    Ok(AblationResult { rows })
}
