use std::fmt;

use rand::Rng;

use super::ks::ks_uniform;
use crate::chsh::{chsh_s, summarize, MeasurementRecord};
use crate::conformal::{expected_set_size, ConformalScorer, TieBreaking};
use crate::error::{Result, TaraError};
use crate::scalar::Real;

/// Conformal level used for the expected prediction-set size feature.
pub const DEFAULT_SET_ALPHA: f64 = 0.1;

/// `[|S|, p_A, p_B, p_AB, p_∅, TARA-k, E|C_α|]` of one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector<F> {
    pub abs_s: F,
    pub p_a: F,
    pub p_b: F,
    pub p_ab: F,
    pub p_empty: F,
    /// One-sample KS distance of the dataset's p-values from Uniform(0,1).
    pub tara_k: F,
    pub exp_set_size: F,
}

pub const FEATURE_NAMES: [&str; 7] = ["abs_s", "p_a", "p_b", "p_ab", "p_empty", "tara_k", "exp_set_size"];

impl<F: Real> FeatureVector<F> {
    pub fn to_array(&self) -> [F; 7] {
        [self.abs_s, self.p_a, self.p_b, self.p_ab, self.p_empty, self.tara_k, self.exp_set_size]
    }

    pub fn project(&self, subset: FeatureSubset) -> Vec<F> {
        let all = self.to_array();
        subset.indices().iter().map(|i| all[*i]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.to_array();
        let unit = |v: F| v >= F::zero() && v <= F::one();
        let ok = a.iter().all(|v| v.is_finite())
            && self.abs_s >= F::zero()
            && self.abs_s <= F::lit(4.0)
            && [self.p_a, self.p_b, self.p_ab, self.p_empty, self.tara_k].into_iter().all(unit)
            && self.exp_set_size >= F::zero()
            && self.exp_set_size <= F::lit(9.0);
        if ok {
            Ok(())
        } else {
            Err(TaraError::invalid(format!("feature vector out of range: {a:?}")))
        }
    }
}

/// Feature columns used by an envelope, for ablation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSubset {
    Full,
    /// Everything except |S|.
    CpOnly,
    SOnly,
    ClickOnly,
}

impl FeatureSubset {
    pub const ALL: [FeatureSubset; 4] =
        [FeatureSubset::Full, FeatureSubset::CpOnly, FeatureSubset::SOnly, FeatureSubset::ClickOnly];

    pub fn indices(self) -> &'static [usize] {
        match self {
            FeatureSubset::Full => &[0, 1, 2, 3, 4, 5, 6],
            FeatureSubset::CpOnly => &[1, 2, 3, 4, 5, 6],
            FeatureSubset::SOnly => &[0],
            FeatureSubset::ClickOnly => &[1, 2, 3, 4],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSubset::Full => "full",
            FeatureSubset::CpOnly => "cp-only",
            FeatureSubset::SOnly => "s-only",
            FeatureSubset::ClickOnly => "click-only",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Features of one dataset plus the p-values they were computed from.
#[derive(Debug, Clone)]
pub struct ExtractedFeatures<F> {
    pub features: FeatureVector<F>,
    pub pvalues: Vec<F>,
}

pub fn extract_features<F: Real>(
    records: &[MeasurementRecord],
    scorer: &ConformalScorer<F>,
    alpha: F,
    ties: TieBreaking,
    rng: &mut impl Rng,
) -> Result<ExtractedFeatures<F>> {
    let summary = summarize::<F>(records)?;
    let pvalues = scorer.pvalues(records, ties, rng)?;
    let tara_k = ks_uniform(&pvalues)?;
    let exp_set_size = expected_set_size(&scorer.model, &scorer.calibration, records, alpha)?;
    let r = summary.click_rates;
    let features = FeatureVector {
        abs_s: chsh_s(&summary).abs(),
        p_a: r.p_a,
        p_b: r.p_b,
        p_ab: r.p_ab,
        p_empty: r.p_empty,
        tara_k,
        exp_set_size,
    };
    features.validate()?;
    Ok(ExtractedFeatures { features, pvalues })
}
