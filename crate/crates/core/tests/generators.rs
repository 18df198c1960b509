//! Monte Carlo checks of the generators against their exact correlators.

use tara_core::chsh::{chsh_s, summarize, CLASSICAL_BOUND, TSIRELSON_BOUND};
use tara_core::datagen::{derive_seed, generate, singlet_correlators, Angles, GeneratorConfig, MixtureWeights, ModelConfig};
use tara_core::Context;

fn run(model: ModelConfig, trials: u64, seed: u64) -> tara_core::Summary {
    let data = generate(&GeneratorConfig::new(model, trials, seed)).unwrap();
    summarize(&data.records).unwrap()
}

#[test]
fn singlet_correlators_within_three_standard_errors() {
    let s = run(ModelConfig::QuantumSinglet { visibility: 1.0, eta: 1.0, angles: Angles::default() }, 1000, 7);
    let exact = singlet_correlators(1.0, &Angles::default());
    for c in Context::ALL {
        let e = exact[c.index()];
        assert!((e.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let se = ((1.0 - e * e) / s.n_coincident[c.index()] as f64).sqrt();
        assert!((s.e(c) - e).abs() <= 3.0 * se, "context {c}: {} vs {e}", s.e(c));
    }
}

#[test]
fn mixture_correlators_match_weights() {
    let weights = MixtureWeights::Biased { bias: 0.6 };
    let exact = weights.expected_correlators().unwrap();
    let s = run(ModelConfig::LhvMixture { weights }, 20_000, 3);
    for c in Context::ALL {
        let e = exact[c.index()];
        let se = ((1.0 - e * e) / s.n_coincident[c.index()] as f64).sqrt();
        assert!((s.e(c) - e).abs() <= 4.0 * se);
    }
}

fn lhv_models() -> Vec<ModelConfig> {
    let w = MixtureWeights::Biased { bias: 1.0 };
    vec![
        ModelConfig::LhvMixture { weights: w.clone() },
        ModelConfig::LhvMemory { weights: w.clone(), order: 3 },
        ModelConfig::LhvCommunication { kappa: 0.0, weights: w },
        ModelConfig::LhvDetection { eta: 1.0, angles: Angles::default() },
    ]
}

#[test]
fn lhv_generators_respect_the_classical_bound() {
    for model in lhv_models() {
        let mut worst: f64 = f64::NEG_INFINITY;
        for seed in 0..50 {
            let s = run(model.clone(), 10_000, derive_seed(99, 1, seed));
            let excess = (chsh_s(&s).abs() - CLASSICAL_BOUND) / s.chsh_standard_error();
            worst = worst.max(excess);
        }
        assert!(worst <= 5.0, "{}: worst excess {worst} SE", model.name());
    }
}

#[test]
fn detection_loophole_exceeds_bound_under_post_selection() {
    // The point of the detection model: coincidence post-selection inflates S.
    let s = run(ModelConfig::LhvDetection { eta: 0.7, angles: Angles::default() }, 10_000, 5);
    assert!(chsh_s(&s) > CLASSICAL_BOUND + 10.0 * s.chsh_standard_error());
    assert!(chsh_s(&s) < 4.0);
}

#[test]
fn visibility_scales_s() {
    let v = 2.716 / TSIRELSON_BOUND;
    let s = run(ModelConfig::QuantumSinglet { visibility: v, eta: 1.0, angles: Angles::default() }, 10_000, 8);
    assert!((chsh_s(&s) - 2.716).abs() <= 3.0 * s.chsh_standard_error());
}

#[test]
fn singlet_click_rates_follow_eta() {
    let eta: f64 = 0.8;
    let s = run(ModelConfig::QuantumSinglet { visibility: 1.0, eta, angles: Angles::default() }, 25_000, 2);
    let n = s.total_trials() as f64;
    let check = |got: f64, p: f64| assert!((got - p).abs() <= 4.0 * (p * (1.0 - p) / n).sqrt(), "{got} vs {p}");
    check(s.click_rates.p_ab, eta * eta);
    check(s.click_rates.p_a, eta * (1.0 - eta));
    check(s.click_rates.p_b, eta * (1.0 - eta));
    check(s.click_rates.p_empty, (1.0 - eta) * (1.0 - eta));
}
