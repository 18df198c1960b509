//! Builds every detector artifact from one run of LHV trials.
//!
//! Records are split in order. Without an envelope the run is cut into
//! thirds: table fit, calibration scores, reference p-values. With an
//! envelope those three take a sixth each and the second half is cut into
//! blocks whose feature vectors train the envelope. Test datasets should have
//! the block size so their features are on the same footing.

use rand::Rng;

use super::envelope::{fit_envelope, EnvelopeConfig, EnvelopeModel};
use super::features::{extract_features, FeatureSubset};
use crate::chsh::MeasurementRecord;
use crate::conformal::{ConformalScorer, TieBreaking};
use crate::error::{Result, TaraError};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct CalibrateOptions<F> {
    pub pseudo_count: F,
    pub set_alpha: F,
    /// Trials per context in each envelope training block; `None` skips the envelope.
    pub block_trials: Option<usize>,
    pub subset: FeatureSubset,
    pub envelope: EnvelopeConfig,
}

impl<F: Real> Default for CalibrateOptions<F> {
    fn default() -> Self {
        CalibrateOptions {
            pseudo_count: F::lit(crate::conformal::DEFAULT_PSEUDO_COUNT),
            set_alpha: F::lit(super::features::DEFAULT_SET_ALPHA),
            block_trials: None,
            subset: FeatureSubset::Full,
            envelope: EnvelopeConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectorArtifacts<F> {
    pub scorer: ConformalScorer<F>,
    /// Randomized p-values of held-out LHV trials.
    pub reference_pvalues: Vec<F>,
    pub envelope: Option<EnvelopeModel<F>>,
    pub subset: FeatureSubset,
}

pub fn calibrate_detector<F: Real>(
    records: &[MeasurementRecord],
    options: &CalibrateOptions<F>,
    rng: &mut impl Rng,
) -> Result<DetectorArtifacts<F>> {
    let n = records.len();
    let (conformal_part, block_part) = match options.block_trials {
        Some(_) => records.split_at(n / 2),
        None => (records, &records[n..]),
    };
    let third = conformal_part.len() / 3;
    if third == 0 {
        return Err(TaraError::TooFewSamples { needed: 3, got: conformal_part.len() });
    }
    let (fit, rest) = conformal_part.split_at(third);
    let (cal, reference) = rest.split_at(third);
    let scorer = ConformalScorer::fit(fit, cal, options.pseudo_count)?;
    let reference_pvalues = scorer.pvalues(reference, TieBreaking::Randomized, rng)?;

    let envelope = match options.block_trials {
        None => None,
        Some(trials) => {
            let block = 4 * trials.max(1);
            let features = block_part
                .chunks_exact(block)
                .map(|chunk| {
                    let f = extract_features(chunk, &scorer, options.set_alpha, TieBreaking::Randomized, rng)?;
                    Ok(f.features.project(options.subset))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(fit_envelope(&features, &options.envelope)?)
        }
    };
    Ok(DetectorArtifacts { scorer, reference_pvalues, envelope, subset: options.subset })
}
