//! Empirical ROC curves, rank AUC and effect sizes.
//!
//! Scores are oriented so that larger means "more quantum".

use crate::datagen::GroundTruth;
use crate::error::{Result, TaraError};
use crate::scalar::{total_cmp, Real};

/// FPR levels reported alongside every curve.
pub const FPR_GRID: [f64; 2] = [0.01, 0.05];

#[derive(Debug, Clone, PartialEq)]
pub struct RocResult<F> {
    /// Decision thresholds (`score ≥ threshold` ⇒ quantum); the first is `+∞`.
    pub thresholds: Vec<F>,
    pub fpr: Vec<F>,
    pub tpr: Vec<F>,
    pub auc: F,
    pub tpr_at_1: F,
    pub tpr_at_5: F,
    pub n_quantum: usize,
    pub n_classical: usize,
}

impl<F: Real> RocResult<F> {
    /// Trapezoidal area under the swept curve.
    pub fn trapezoid_auc(&self) -> F {
        let half = F::lit(0.5);
        self.fpr
            .windows(2)
            .zip(self.tpr.windows(2))
            .fold(F::zero(), |acc, (f, t)| acc + (f[1] - f[0]) * (t[0] + t[1]) * half)
    }

    /// Highest TPR among sweep points whose FPR does not exceed `target`.
    pub fn tpr_at_fpr(&self, target: F) -> F {
        self.fpr
            .iter()
            .zip(&self.tpr)
            .filter(|(f, _)| **f <= target)
            .map(|(_, t)| *t)
            .fold(F::zero(), F::max)
    }

    /// Hanley–McNeil standard error of the AUC.
    pub fn auc_standard_error(&self) -> F {
        auc_standard_error(self.auc, self.n_quantum, self.n_classical)
    }
}

fn class_counts(labels: &[GroundTruth]) -> (usize, usize) {
    let q = labels.iter().filter(|l| **l == GroundTruth::Quantum).count();
    (q, labels.len() - q)
}

fn check_inputs<F: Real>(scores: &[F], labels: &[GroundTruth]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(TaraError::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(TaraError::invalid("scores must be finite"));
    }
    let (q, c) = class_counts(labels);
    if q == 0 || c == 0 {
        return Err(TaraError::SingleClass);
    }
    Ok((q, c))
}

pub fn roc<F: Real>(scores: &[F], labels: &[GroundTruth]) -> Result<RocResult<F>> {
    let (n_q, n_c) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| total_cmp(&scores[*b], &scores[*a]));

    let (pos, neg) = (F::from_count(n_q), F::from_count(n_c));
    let mut thresholds = vec![F::infinity()];
    let mut fpr = vec![F::zero()];
    let mut tpr = vec![F::zero()];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            match labels[order[i]] {
                GroundTruth::Quantum => tp += 1,
                GroundTruth::Classical => fp += 1,
            }
            i += 1;
        }
        thresholds.push(s);
        fpr.push(F::from_count(fp) / neg);
        tpr.push(F::from_count(tp) / pos);
    }

    let mut result = RocResult {
        thresholds,
        fpr,
        tpr,
        auc: auc_rank(scores, labels)?,
        tpr_at_1: F::zero(),
        tpr_at_5: F::zero(),
        n_quantum: n_q,
        n_classical: n_c,
    };
    result.tpr_at_1 = result.tpr_at_fpr(F::lit(FPR_GRID[0]));
    result.tpr_at_5 = result.tpr_at_fpr(F::lit(FPR_GRID[1]));
    Ok(result)
}

/// Mann–Whitney AUC with midranks for ties.
pub fn auc_rank<F: Real>(scores: &[F], labels: &[GroundTruth]) -> Result<F> {
    let (n_q, n_c) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| total_cmp(&scores[*a], &scores[*b]));
    // Ranks are doubled so midranks stay integral.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let mid2 = (i + 1 + j) as u128;
        for k in &order[i..j] {
            if labels[*k] == GroundTruth::Quantum {
                rank_sum2 += mid2;
            }
        }
        i = j;
    }
    let u2 = rank_sum2 - (n_q as u128) * (n_q as u128 + 1);
    let denom = 2.0 * n_q as f64 * n_c as f64;
    Ok(F::lit(u2 as f64 / denom))
}

pub fn auc_standard_error<F: Real>(auc: F, n_quantum: usize, n_classical: usize) -> F {
    let (np, nn) = (F::from_count(n_quantum), F::from_count(n_classical));
    let q1 = auc / (F::lit(2.0) - auc);
    let q2 = F::lit(2.0) * auc * auc / (F::one() + auc);
    let a2 = auc * auc;
    let var = (auc * (F::one() - auc) + (np - F::one()) * (q1 - a2) + (nn - F::one()) * (q2 - a2)) / (np * nn);
    var.max(F::zero()).sqrt()
}

/// `(mean_a − mean_b) / s_pooled` with `n − 1` weighting.
pub fn cohens_d<F: Real>(a: &[F], b: &[F]) -> Result<F> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(TaraError::TooFewSamples { needed: 2, got: s.len() });
        }
    }
    let mean = |s: &[F]| s.iter().fold(F::zero(), |acc, v| acc + *v) / F::from_count(s.len());
    let ss = |s: &[F], m: F| s.iter().fold(F::zero(), |acc, v| acc + (*v - m) * (*v - m));
    let (ma, mb) = (mean(a), mean(b));
    let pooled = (ss(a, ma) + ss(b, mb)) / F::from_count(a.len() + b.len() - 2);
    if !(pooled > F::zero()) {
        return Err(TaraError::ZeroVariance);
    }
    Ok((ma - mb) / pooled.sqrt())
}
