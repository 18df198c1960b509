mod common;

use common::{artifacts, lhv_boundary, records, singlet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tara_core::conformal::TieBreaking;
use tara_core::datagen::{derive_seed, generate, GeneratorConfig, ModelConfig};
use tara_core::io::read_dataset;
use tara_core::tara_k::{detect_batch, extract_features, fit_envelope, ks_threshold, ks_uniform_threshold, DetectorArtifacts, EnvelopeConfig, FeatureSubset};
use tara_core::{Decision, MeasurementRecord};

fn decide(art: &DetectorArtifacts<f64>, data: &[MeasurementRecord], seed: u64) -> Decision {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ex = extract_features(data, &art.scorer, 0.1, TieBreaking::Randomized, &mut rng).unwrap();
    let envelope = art.envelope.as_ref().unwrap();
    detect_batch(envelope, art.subset, &art.reference_pvalues, &ex.features, &ex.pvalues, 0.05)
        .unwrap()
        .decision
}

#[test]
fn batch_power_and_false_positive_rate() {
    let art = artifacts(lhv_boundary(), 250, 80, 1);
    let quantum = (0..50)
        .filter(|i| decide(&art, &records(singlet(1.0), 250, derive_seed(2, 0, *i)), *i) == Decision::Quantum)
        .count();
    assert!(quantum >= 48, "quantum detected in {quantum}/50");
    let classical = (0..50)
        .filter(|i| decide(&art, &records(lhv_boundary(), 250, derive_seed(3, 0, *i)), *i) == Decision::Classical)
        .count();
    let floor = 0.9 - 3.0 * (0.9f64 * 0.1 / 50.0).sqrt();
    assert!(classical as f64 / 50.0 >= floor, "classical in {classical}/50");
}

#[test]
fn hardware_fixture_is_quantum() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/ionq_equivalent.csv");
    let data = read_dataset(path).unwrap().records;
    let art = artifacts(lhv_boundary(), 1000, 60, 4);
    assert_eq!(decide(&art, &data, 5), Decision::Quantum);
}

#[test]
fn pr_box_features() {
    let art = artifacts(lhv_boundary(), 100, 60, 6);
    let data = generate(&GeneratorConfig::new(ModelConfig::PrBox {}, 100, 1)).unwrap().records;
    let ex = extract_features(&data, &art.scorer, 0.1, TieBreaking::Randomized, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(ex.features.abs_s, 4.0);
    assert_eq!(ex.features.p_ab, 1.0);
    assert_eq!(ex.features.p_empty, 0.0);
}

#[test]
fn lhv_tara_k_below_threshold_under_null() {
    let mixture = tara_core::datagen::MixtureWeights::Biased { bias: 0.7 };
    let model = ModelConfig::LhvMixture { weights: mixture };
    let art = artifacts(model.clone(), 100, 60, 7);
    let below = (0..50)
        .filter(|i| {
            let data = records(model.clone(), 250, derive_seed(8, 0, *i));
            let mut rng = ChaCha8Rng::seed_from_u64(*i);
            let ex = extract_features(&data, &art.scorer, 0.1, TieBreaking::Randomized, &mut rng).unwrap();
            ex.features.tara_k <= ks_uniform_threshold(data.len(), 0.05).unwrap()
        })
        .count();
    assert!(below >= 45, "{below}/50 below threshold");
}

#[test]
fn ks_branch_flags_shifted_pvalues() {
    let art = artifacts(lhv_boundary(), 100, 60, 9);
    let data = records(singlet(1.0), 1000, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ex = extract_features(&data, &art.scorer, 0.1, TieBreaking::Randomized, &mut rng).unwrap();
    let report = detect_batch(art.envelope.as_ref().unwrap(), art.subset, &art.reference_pvalues, &ex.features, &ex.pvalues, 0.05).unwrap();
    assert!(report.ks_flag);
    assert_eq!(report.ks_threshold, ks_threshold(art.reference_pvalues.len(), ex.pvalues.len(), 0.05).unwrap());
    assert!((report.combined_fpr_bound - 0.1).abs() < 1e-12);
}

#[test]
fn decision_is_monotone_in_tara_k_above_the_envelope_minimum() {
    let art = artifacts(lhv_boundary(), 100, 60, 11);
    let envelope = art.envelope.as_ref().unwrap();
    let data = records(lhv_boundary(), 100, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = extract_features(&data, &art.scorer, 0.1, TieBreaking::Randomized, &mut rng).unwrap();
    let grid: Vec<f64> = (0..=200).map(|i| f64::from(i) / 200.0).collect();
    let scores: Vec<f64> = grid
        .iter()
        .map(|t| {
            let mut f = base.features;
            f.tara_k = *t;
            envelope.anomaly_score(&f.project(FeatureSubset::Full)).unwrap()
        })
        .collect();
    let argmin = (0..scores.len()).min_by(|a, b| scores[*a].total_cmp(&scores[*b])).unwrap();
    let mut seen_quantum = false;
    for t in &grid[argmin..] {
        let mut f = base.features;
        f.tara_k = *t;
        let d = detect_batch(envelope, art.subset, &art.reference_pvalues, &f, &base.pvalues, 0.05).unwrap().decision;
        if seen_quantum {
            assert_eq!(d, Decision::Quantum);
        }
        seen_quantum |= d == Decision::Quantum;
    }
    assert!(seen_quantum, "tara_k = 1 should be anomalous");
}

#[test]
fn envelope_score_is_affine_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let d = 3;
    let train: Vec<Vec<f64>> = (0..400).map(|_| (0..d).map(|_| normal.sample(&mut rng)).collect()).collect();
    let a = [[2.0, 0.3, -0.5], [0.1, 0.7, 0.2], [-0.4, 0.0, 1.5]];
    let shift = [5.0, -3.0, 0.25];
    let map = |x: &Vec<f64>| -> Vec<f64> { (0..d).map(|i| (0..d).map(|j| a[i][j] * x[j]).sum::<f64>() + shift[i]).collect() };
    let mapped: Vec<Vec<f64>> = train.iter().map(map).collect();
    let config = EnvelopeConfig { ridge_factor: 1e-12, ..EnvelopeConfig::default() };
    let e1 = fit_envelope(&train, &config).unwrap();
    let e2 = fit_envelope(&mapped, &config).unwrap();
    for _ in 0..50 {
        let x: Vec<f64> = (0..d).map(|_| 2.0 * normal.sample(&mut rng) + rng.random_range(-1.0..1.0)).collect();
        let s1 = e1.anomaly_score(&x).unwrap();
        let s2 = e2.anomaly_score(&map(&x)).unwrap();
        assert!((s1 - s2).abs() <= 1e-6 * s1.max(1.0), "{s1} vs {s2}");
    }
}
