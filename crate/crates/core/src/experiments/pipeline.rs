//! Shared steps of the experiment harnesses: pooled conformal fitting and
//! parallel feature extraction over a family.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::family::Family;
use crate::chsh::MeasurementRecord;
use crate::conformal::{ConformalScorer, TieBreaking};
use crate::datagen::{derive_seed, GroundTruth};
use crate::error::Result;
use crate::tara_k::{extract_features, ExtractedFeatures};

/// Seed streams; each harness offsets them so its cells never share randomness.
pub(crate) mod stream {
    pub const FIT: u64 = 1;
    pub const CALIBRATE: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const TEST_CLASSICAL: u64 = 4;
    pub const TEST_QUANTUM: u64 = 5;
    pub const PVALUES: u64 = 6;
    pub const SHUFFLE: u64 = 7;
    pub const CROSS_FIT: u64 = 8;
    pub const CROSS_CALIBRATE: u64 = 9;
}

fn pooled(family: &Family, seed: u64, stream: u64, count: usize, tpc: u64) -> Result<Vec<MeasurementRecord>> {
    let parts: Vec<Vec<MeasurementRecord>> = (0..count)
        .into_par_iter()
        .map(|i| family.dataset(seed, stream, i, count, tpc).map(|(_, d)| d.records))
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Conformal scorer fitted on `count` pooled datasets and calibrated on another `count`.
pub fn fit_family_scorer(
    family: &Family,
    seed: u64,
    streams: (u64, u64),
    count: usize,
    trials_per_context: u64,
    pseudo_count: f64,
) -> Result<ConformalScorer<f64>> {
    let fit = pooled(family, seed, streams.0, count, trials_per_context)?;
    let cal = pooled(family, seed, streams.1, count, trials_per_context)?;
    ConformalScorer::fit(&fit, &cal, pseudo_count)
}

/// Features of `count` datasets of a family, in index order.
pub fn family_features(
    family: &Family,
    seed: u64,
    stream: u64,
    count: usize,
    trials_per_context: u64,
    scorer: &ConformalScorer<f64>,
    set_alpha: f64,
) -> Result<Vec<ExtractedFeatures<f64>>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (_, data) = family.dataset(seed, stream, i, count, trials_per_context)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::PVALUES, stream * 1_000_003 + i as u64));
            extract_features(&data.records, scorer, set_alpha, TieBreaking::Randomized, &mut rng)
        })
        .collect()
}

pub(crate) fn shuffled(labels: &[GroundTruth], seed: u64) -> Vec<GroundTruth> {
    let mut out = labels.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::SHUFFLE, 0)));
    out
}

pub(crate) fn test_labels(n_classical: usize, n_quantum: usize) -> Vec<GroundTruth> {
    let mut labels = vec![GroundTruth::Classical; n_classical];
    labels.extend(std::iter::repeat_n(GroundTruth::Quantum, n_quantum));
    labels
}
