use std::fmt;

use super::envelope::EnvelopeModel;
use super::features::{FeatureSubset, FeatureVector};
use super::ks::{ks_threshold, ks_two_sample};
use crate::error::{Result, TaraError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Classical,
    Quantum,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Classical => "Classical",
            Decision::Quantum => "Quantum",
        })
    }
}

/// Every number behind a batch decision.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport<F> {
    pub decision: Decision,
    pub anomaly_score: F,
    pub anomaly_threshold: F,
    pub envelope_flag: bool,
    /// One-sample KS feature of the test data.
    pub tara_k: F,
    /// Two-sample KS between reference LHV p-values and test p-values.
    pub ks_statistic: F,
    pub ks_threshold: F,
    pub ks_flag: bool,
    pub envelope_fpr: F,
    pub ks_alpha: F,
    /// Bonferroni bound on the false-positive rate of the OR rule.
    pub combined_fpr_bound: F,
}

impl<F: Real> BatchReport<F> {
    /// `key=value` lines in a fixed order.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("decision", self.decision.to_string()),
            ("anomaly_score", self.anomaly_score.to_string()),
            ("anomaly_threshold", self.anomaly_threshold.to_string()),
            ("envelope_flag", self.envelope_flag.to_string()),
            ("tara_k", self.tara_k.to_string()),
            ("ks_two_sample", self.ks_statistic.to_string()),
            ("ks_threshold", self.ks_threshold.to_string()),
            ("ks_flag", self.ks_flag.to_string()),
            ("envelope_fpr", self.envelope_fpr.to_string()),
            ("ks_alpha", self.ks_alpha.to_string()),
            ("combined_fpr_bound", self.combined_fpr_bound.to_string()),
        ]
    }
}

/// Quantum iff the envelope flags the features or the two-sample KS of
/// p-values exceeds its level-`ks_alpha` threshold.
pub fn detect_batch<F: Real>(
    envelope: &EnvelopeModel<F>,
    subset: FeatureSubset,
    reference_pvalues: &[F],
    features: &FeatureVector<F>,
    test_pvalues: &[F],
    ks_alpha: F,
) -> Result<BatchReport<F>> {
    if envelope.dim() != subset.indices().len() {
        return Err(TaraError::invalid(format!(
            "envelope has dimension {} but subset {subset} has {}",
            envelope.dim(),
            subset.indices().len()
        )));
    }
    let anomaly_score = envelope.anomaly_score(&features.project(subset))?;
    let ks_statistic = ks_two_sample(reference_pvalues, test_pvalues)?;
    let threshold = ks_threshold(reference_pvalues.len(), test_pvalues.len(), ks_alpha)?;
    let envelope_flag = anomaly_score > envelope.threshold;
    let ks_flag = ks_statistic > threshold;
    Ok(BatchReport {
        decision: if envelope_flag || ks_flag { Decision::Quantum } else { Decision::Classical },
        anomaly_score,
        anomaly_threshold: envelope.threshold,
        envelope_flag,
        tara_k: features.tara_k,
        ks_statistic,
        ks_threshold: threshold,
        ks_flag,
        envelope_fpr: envelope.target_fpr,
        ks_alpha,
        combined_fpr_bound: (envelope.target_fpr + ks_alpha).min(F::one()),
    })
}
