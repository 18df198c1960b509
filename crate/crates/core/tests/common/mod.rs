#![allow(dead_code)]

pub mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tara_core::datagen::{derive_seed, generate, Angles, GeneratorConfig, MixtureWeights, ModelConfig};
use tara_core::tara_k::{calibrate_detector, CalibrateOptions, DetectorArtifacts};
use tara_core::MeasurementRecord;

pub fn lhv_boundary() -> ModelConfig {
    ModelConfig::LhvMixture { weights: MixtureWeights::Biased { bias: 1.0 } }
}

pub fn singlet(visibility: f64) -> ModelConfig {
    ModelConfig::QuantumSinglet { visibility, eta: 1.0, angles: Angles::default() }
}

pub fn records(model: ModelConfig, trials_per_context: u64, seed: u64) -> Vec<MeasurementRecord> {
    generate(&GeneratorConfig::new(model, trials_per_context, seed)).unwrap().records
}

/// Detector calibrated on one long run of `model`, with envelope blocks of `block` trials per context.
pub fn artifacts(model: ModelConfig, block: usize, blocks: usize, seed: u64) -> DetectorArtifacts<f64> {
    let per_context = (2 * block * blocks) as u64;
    let data = records(model, per_context, derive_seed(seed, 100, 0));
    let options = CalibrateOptions { block_trials: Some(block), ..CalibrateOptions::default() };
    calibrate_detector(&data, &options, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}
