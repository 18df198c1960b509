//! Summary report for a hardware (or hardware-format) dataset.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chsh::{chsh_s, classical_margin_percent, classify_regime, summarize, ClickRates, Context, MeasurementRecord, Regime};
use crate::conformal::{ConformalScorer, TieBreaking};
use crate::datagen::derive_seed;
use crate::error::Result;
use crate::tara_k::{detect_batch, extract_features, ks_threshold, ks_two_sample, BatchReport, Decision, EnvelopeModel, FeatureSubset};
use crate::tara_m::{detect_stream, StreamConfig};

/// Fitted artifacts needed for detector verdicts.
pub struct Detectors<'a> {
    pub scorer: &'a ConformalScorer<f64>,
    pub reference_pvalues: &'a [f64],
    pub envelope: Option<(&'a EnvelopeModel<f64>, FeatureSubset)>,
    pub ks_alpha: f64,
    pub set_alpha: f64,
    pub stream: StreamConfig<f64>,
    pub seed: u64,
}

/// Batch verdict; without an envelope only the two-sample KS branch decides.
#[derive(Debug, Clone, PartialEq)]
pub enum BatchVerdict {
    Full(BatchReport<f64>),
    KsOnly { tara_k: f64, ks_statistic: f64, ks_threshold: f64, decision: Decision },
}

impl BatchVerdict {
    pub fn decision(&self) -> Decision {
        match self {
            BatchVerdict::Full(r) => r.decision,
            BatchVerdict::KsOnly { decision, .. } => *decision,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamVerdict {
    pub detected: bool,
    pub stop_time: Option<u64>,
    pub final_log_wealth: f64,
    pub steps: u64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardwareReport {
    pub n_trials: u64,
    pub correlators: [f64; 4],
    pub n_coincident: [u64; 4],
    pub s: f64,
    pub margin_percent: f64,
    pub regime: Regime,
    pub click_rates: ClickRates<f64>,
    pub flagged_contexts: Vec<Context>,
    pub batch: Option<BatchVerdict>,
    pub stream: Option<StreamVerdict>,
}

pub fn hardware_report(records: &[MeasurementRecord], detectors: Option<&Detectors<'_>>) -> Result<HardwareReport> {
    let summary = summarize::<f64>(records)?;
    let s = chsh_s(&summary);
    let mut report = HardwareReport {
        n_trials: summary.total_trials(),
        correlators: summary.correlators,
        n_coincident: summary.n_coincident,
        s,
        margin_percent: classical_margin_percent(s),
        regime: classify_regime(s)?,
        click_rates: summary.click_rates,
        flagged_contexts: summary.flagged_contexts(),
        batch: None,
        stream: None,
    };
    if let Some(d) = detectors {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(d.seed, 0x4857, 0));
        let extracted = extract_features(records, d.scorer, d.set_alpha, TieBreaking::Randomized, &mut rng)?;
        report.batch = Some(match d.envelope {
            Some((envelope, subset)) => BatchVerdict::Full(detect_batch(
                envelope,
                subset,
                d.reference_pvalues,
                &extracted.features,
                &extracted.pvalues,
                d.ks_alpha,
            )?),
            None => {
                let ks_statistic = ks_two_sample(d.reference_pvalues, &extracted.pvalues)?;
                let threshold = ks_threshold(d.reference_pvalues.len(), extracted.pvalues.len(), d.ks_alpha)?;
                BatchVerdict::KsOnly {
                    tara_k: extracted.features.tara_k,
                    ks_statistic,
                    ks_threshold: threshold,
                    decision: if ks_statistic > threshold { Decision::Quantum } else { Decision::Classical },
                }
            }
        });
        let stream = detect_stream(extracted.pvalues.iter().copied(), &d.stream)?;
        report.stream = Some(StreamVerdict {
            detected: stream.detected,
            stop_time: stream.stop_time,
            final_log_wealth: stream.final_log_wealth,
            steps: stream.steps,
            valid: stream.valid,
        });
    }
    Ok(report)
}

impl HardwareReport {
    /// `(key, value)` pairs in display order.
    pub fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("trials".to_string(), self.n_trials.to_string()),
        ];
        for c in Context::ALL {
            rows.push((format!("E{c}"), format!("{:.4}", self.correlators[c.index()])));
        }
        rows.push(("S".into(), format!("{:.3}", self.s)));
        rows.push(("margin_percent".into(), format!("{:+.1}", self.margin_percent)));
        rows.push(("regime".into(), self.regime.to_string()));
        let r = &self.click_rates;
        rows.push(("p_a".into(), format!("{:.4}", r.p_a)));
        rows.push(("p_b".into(), format!("{:.4}", r.p_b)));
        rows.push(("p_ab".into(), format!("{:.4}", r.p_ab)));
        rows.push(("p_empty".into(), format!("{:.4}", r.p_empty)));
        if !self.flagged_contexts.is_empty() {
            let list: Vec<String> = self.flagged_contexts.iter().map(|c| c.to_string()).collect();
            rows.push(("zero_coincidence".into(), list.join(" ")));
        }
        match &self.batch {
            Some(BatchVerdict::Full(b)) => {
                rows.push(("tara_k".into(), format!("{:.4}", b.tara_k)));
                rows.push(("anomaly_score".into(), format!("{:.4}", b.anomaly_score)));
                rows.push(("anomaly_threshold".into(), format!("{:.4}", b.anomaly_threshold)));
                rows.push(("ks_two_sample".into(), format!("{:.4}", b.ks_statistic)));
                rows.push(("ks_threshold".into(), format!("{:.4}", b.ks_threshold)));
                rows.push(("tara_k_decision".into(), b.decision.to_string()));
            }
            Some(BatchVerdict::KsOnly { tara_k, ks_statistic, ks_threshold, decision }) => {
                rows.push(("tara_k".into(), format!("{tara_k:.4}")));
                rows.push(("ks_two_sample".into(), format!("{ks_statistic:.4}")));
                rows.push(("ks_threshold".into(), format!("{ks_threshold:.4}")));
                rows.push(("tara_k_decision".into(), format!("{decision} (ks branch only)")));
            }
            None => {}
        }
        if let Some(s) = &self.stream {
            rows.push(("tara_m_log_wealth".into(), format!("{:.3}", s.final_log_wealth)));
            rows.push((
                "tara_m_stop".into(),
                s.stop_time.map_or_else(|| "none".to_string(), |t| t.to_string()),
            ));
            let verdict = if s.detected { "Quantum" } else { "Classical" };
            rows.push(("tara_m_decision".into(), verdict.to_string()));
            if !s.valid {
                rows.push(("warning".into(), "betting rule is not predictable; error control does not hold".into()));
            }
        }
        rows
    }

    pub fn render_table(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}
