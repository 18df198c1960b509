//! Seeded CHSH trial generators: the local hidden variable null family
//! (deterministic, mixture, detection-, memory- and communication-loophole
//! variants), the noisy quantum singlet and the PR box.
//!
//! The quantum generator samples outcome pairs from the exact singlet
//! correlators `E_xz = v·cos(θA_x − θB_z)` with uniform marginals instead of
//! simulating a state vector; for CHSH statistics the two are identically
//! distributed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chsh::{Context, MeasurementRecord, Outcome};
use crate::error::{Result, TaraError};

/// Local response functions `A(x) = a_x`, `B(z) = b_z` for one hidden variable value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub a0: i8,
    pub a1: i8,
    pub b0: i8,
    pub b1: i8,
}

impl DeterministicStrategy {
    pub fn new(a0: i8, a1: i8, b0: i8, b1: i8) -> Result<Self> {
        if [a0, a1, b0, b1].iter().any(|v| v.abs() != 1) {
            return Err(TaraError::config("strategy responses must be +1 or -1"));
        }
        Ok(DeterministicStrategy { a0, a1, b0, b1 })
    }

    /// Strategy number `index` in 0..16; bit 3 is `a0`, bit 0 is `b1`, set bits mean -1.
    pub fn from_index(index: usize) -> Self {
        let bit = |k: usize| if (index >> k) & 1 == 1 { -1 } else { 1 };
        DeterministicStrategy { a0: bit(3), a1: bit(2), b0: bit(1), b1: bit(0) }
    }

    pub fn alice(&self, x: u8) -> i8 {
        if x == 0 {
            self.a0
        } else {
            self.a1
        }
    }

    pub fn bob(&self, z: u8) -> i8 {
        if z == 0 {
            self.b0
        } else {
            self.b1
        }
    }

    pub fn correlator(&self, c: Context) -> i8 {
        self.alice(c.x()) * self.bob(c.z())
    }

    /// `a0·b0 + a0·b1 + a1·b0 − a1·b1`.
    pub fn chsh(&self) -> i8 {
        self.a0 * self.b0 + self.a0 * self.b1 + self.a1 * self.b0 - self.a1 * self.b1
    }
}

/// All 16 deterministic local strategies with their CHSH values.
pub fn enumerate_strategies() -> Vec<(DeterministicStrategy, i8)> {
    (0..16)
        .map(|i| {
            let s = DeterministicStrategy::from_index(i);
            (s, s.chsh())
        })
        .collect()
}

/// Weights over the 16 deterministic strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixtureWeights {
    /// One weight per strategy in [`DeterministicStrategy::from_index`] order.
    Explicit(Vec<f64>),
    /// `bias` of the mass spread uniformly over the eight `S = +2` strategies, the rest
    /// uniformly over all sixteen. Gives `E = bias/2 · (1, 1, 1, −1)` and `S = 2·bias`.
    Biased { bias: f64 },
}

impl Default for MixtureWeights {
    fn default() -> Self {
        MixtureWeights::Biased { bias: 1.0 }
    }
}

impl MixtureWeights {
    pub fn resolve(&self) -> Result<[f64; 16]> {
        let w: Vec<f64> = match self {
            MixtureWeights::Explicit(w) => w.clone(),
            MixtureWeights::Biased { bias } => {
                if !(0.0..=1.0).contains(bias) {
                    return Err(TaraError::config(format!("bias {bias} outside [0,1]")));
                }
                (0..16)
                    .map(|i| {
                        let plus = DeterministicStrategy::from_index(i).chsh() == 2;
                        bias * if plus { 1.0 / 8.0 } else { 0.0 } + (1.0 - bias) / 16.0
                    })
                    .collect()
            }
        };
        if w.len() != 16 {
            return Err(TaraError::config(format!("mixture needs 16 weights, got {}", w.len())));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(TaraError::config("mixture weights must be non-negative"));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(TaraError::config(format!("mixture weights sum to {total}, not 1")));
        }
        let mut out = [0.0; 16];
        out.copy_from_slice(&w);
        Ok(out)
    }

    /// Expected correlators `Σ_λ w_λ a_x(λ) b_z(λ)`.
    pub fn expected_correlators(&self) -> Result<[f64; 4]> {
        let w = self.resolve()?;
        Ok(Context::ALL.map(|c| {
            (0..16)
                .map(|i| w[i] * f64::from(DeterministicStrategy::from_index(i).correlator(c)))
                .sum()
        }))
    }
}

/// Measurement angles for Alice's and Bob's two settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

impl Default for Angles {
    /// θA = (0, π/2), θB = (π/4, −π/4): the angles that reach Tsirelson's bound.
    fn default() -> Self {
        Angles { alice: [0.0, FRAC_PI_2], bob: [FRAC_PI_4, -FRAC_PI_4] }
    }
}

fn one() -> f64 {
    1.0
}

fn default_order() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    LhvDeterministic {
        /// `[a0, a1, b0, b1]`
        strategy: [i8; 4],
    },
    LhvMixture {
        #[serde(default)]
        weights: MixtureWeights,
    },
    /// Shared angle λ ~ U[0, 2π); each side answers `sign(cos(λ − θ))` and clicks
    /// only when `|cos(λ − θ)| ≥ 1 − η`.
    LhvDetection {
        eta: f64,
        #[serde(default)]
        angles: Angles,
    },
    /// Mixture strategy whose global sign flips according to the parity of
    /// disagreeing outcome pairs among the last `order` trials.
    LhvMemory {
        #[serde(default)]
        weights: MixtureWeights,
        #[serde(default = "default_order")]
        order: usize,
    },
    /// With probability κ Bob learns `x` and answers `b = a·(−1)^{xz}`;
    /// otherwise behaves as the mixture.
    LhvCommunication {
        kappa: f64,
        #[serde(default)]
        weights: MixtureWeights,
    },
    QuantumSinglet {
        #[serde(default = "one")]
        visibility: f64,
        /// Independent per-side click probability.
        #[serde(default = "one")]
        eta: f64,
        #[serde(default)]
        angles: Angles,
    },
    PrBox {},
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::LhvDeterministic { .. } => "lhv-deterministic",
            ModelConfig::LhvMixture { .. } => "lhv-mixture",
            ModelConfig::LhvDetection { .. } => "lhv-detection",
            ModelConfig::LhvMemory { .. } => "lhv-memory",
            ModelConfig::LhvCommunication { .. } => "lhv-communication",
            ModelConfig::QuantumSinglet { .. } => "quantum-singlet",
            ModelConfig::PrBox {} => "pr-box",
        }
    }

    pub fn label(&self) -> GroundTruth {
        match self {
            ModelConfig::QuantumSinglet { .. } | ModelConfig::PrBox {} => GroundTruth::Quantum,
            _ => GroundTruth::Classical,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64, open_low: bool| {
            let ok = if open_low { v > 0.0 && v <= 1.0 } else { (0.0..=1.0).contains(&v) };
            if ok {
                Ok(())
            } else {
                let range = if open_low { "(0,1]" } else { "[0,1]" };
                Err(TaraError::config(format!("{name} = {v} outside {range}")))
            }
        };
        match self {
            ModelConfig::LhvDeterministic { strategy } => {
                let [a0, a1, b0, b1] = *strategy;
                DeterministicStrategy::new(a0, a1, b0, b1).map(|_| ())
            }
            ModelConfig::LhvMixture { weights } => weights.resolve().map(|_| ()),
            ModelConfig::LhvDetection { eta, .. } => unit("eta", *eta, true),
            ModelConfig::LhvMemory { weights, order } => {
                if *order == 0 {
                    return Err(TaraError::config("memory order must be at least 1"));
                }
                weights.resolve().map(|_| ())
            }
            ModelConfig::LhvCommunication { kappa, weights } => {
                unit("kappa", *kappa, false)?;
                weights.resolve().map(|_| ())
            }
            ModelConfig::QuantumSinglet { visibility, eta, .. } => {
                unit("visibility", *visibility, false)?;
                unit("eta", *eta, true)
            }
            ModelConfig::PrBox {} => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Contexts cycle 00, 01, 10, 11.
    #[default]
    RoundRobin,
    /// Each trial draws its context uniformly at random.
    Uniform,
}

/// Generator configuration as stored in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: Option<u64>,
    pub trials_per_context: u64,
    #[serde(default)]
    pub schedule: Schedule,
    pub model: ModelConfig,
}

impl GeneratorConfig {
    pub fn new(model: ModelConfig, trials_per_context: u64, seed: u64) -> Self {
        GeneratorConfig { seed: Some(seed), trials_per_context, schedule: Schedule::RoundRobin, model }
    }

    pub fn validate(&self) -> Result<u64> {
        let seed = self.seed.ok_or_else(|| TaraError::config("seed required"))?;
        if self.trials_per_context == 0 {
            return Err(TaraError::config("trials_per_context must be positive"));
        }
        self.model.validate()?;
        Ok(seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundTruth {
    Classical,
    Quantum,
}

impl std::fmt::Display for GroundTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GroundTruth::Classical => "classical",
            GroundTruth::Quantum => "quantum",
        })
    }
}

/// Mixes a base seed with a stream tag and index (SplitMix64 finalizer) so
/// experiment cells get independent, reproducible seeds.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum Sampler {
    Deterministic(DeterministicStrategy),
    Mixture(WeightedIndex<f64>),
    Detection { eta: f64, angles: Angles },
    Memory { mix: WeightedIndex<f64>, order: usize, history: Vec<bool> },
    Communication { kappa: f64, mix: WeightedIndex<f64> },
    Quantum { correlators: [f64; 4], eta: f64 },
    PrBox,
}

fn weighted(weights: &MixtureWeights) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights.resolve()?).map_err(|e| TaraError::config(e.to_string()))
}

/// Stateful stream of trials; one instance serves one consumer.
pub struct Generator {
    rng: ChaCha8Rng,
    sampler: Sampler,
    schedule: Schedule,
    next: u64,
    total: u64,
}

impl Generator {
    pub fn new(config: &GeneratorConfig) -> Result<Self> {
        let seed = config.validate()?;
        let sampler = match &config.model {
            ModelConfig::LhvDeterministic { strategy } => {
                let [a0, a1, b0, b1] = *strategy;
                Sampler::Deterministic(DeterministicStrategy::new(a0, a1, b0, b1)?)
            }
            ModelConfig::LhvMixture { weights } => Sampler::Mixture(weighted(weights)?),
            ModelConfig::LhvDetection { eta, angles } => Sampler::Detection { eta: *eta, angles: *angles },
            ModelConfig::LhvMemory { weights, order } => {
                Sampler::Memory { mix: weighted(weights)?, order: *order, history: Vec::new() }
            }
            ModelConfig::LhvCommunication { kappa, weights } => {
                Sampler::Communication { kappa: *kappa, mix: weighted(weights)? }
            }
            ModelConfig::QuantumSinglet { visibility, eta, angles } => Sampler::Quantum {
                correlators: singlet_correlators(*visibility, angles),
                eta: *eta,
            },
            ModelConfig::PrBox {} => Sampler::PrBox,
        };
        Ok(Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sampler,
            schedule: config.schedule,
            next: 0,
            total: 4 * config.trials_per_context,
        })
    }

    fn context(&mut self, t: u64) -> Context {
        match self.schedule {
            Schedule::RoundRobin => Context::from_index((t % 4) as usize),
            Schedule::Uniform => Context::from_index(self.rng.random_range(0..4)),
        }
    }

    fn sample(&mut self, c: Context) -> (Outcome, Outcome) {
        let rng = &mut self.rng;
        let signs = |s: DeterministicStrategy| (Outcome::from_sign(s.alice(c.x())), Outcome::from_sign(s.bob(c.z())));
        match &mut self.sampler {
            Sampler::Deterministic(s) => signs(*s),
            Sampler::Mixture(mix) => signs(DeterministicStrategy::from_index(mix.sample(rng))),
            Sampler::Detection { eta, angles } => {
                let lambda = rng.random::<f64>() * 2.0 * PI;
                let side = |theta: f64| {
                    let v = (lambda - theta).cos();
                    if v.abs() >= 1.0 - *eta {
                        Outcome::from_sign(if v >= 0.0 { 1 } else { -1 })
                    } else {
                        Outcome::NoClick
                    }
                };
                (side(angles.alice[usize::from(c.x())]), side(angles.bob[usize::from(c.z())]))
            }
            Sampler::Memory { mix, order, history } => {
                let flip = history.iter().filter(|d| **d).count() % 2 == 1;
                let s = DeterministicStrategy::from_index(mix.sample(rng));
                let sign = if flip { -1 } else { 1 };
                let a = sign * s.alice(c.x());
                let b = sign * s.bob(c.z());
                history.push(a != b);
                if history.len() > *order {
                    history.remove(0);
                }
                (Outcome::from_sign(a), Outcome::from_sign(b))
            }
            Sampler::Communication { kappa, mix } => {
                if rng.random::<f64>() < *kappa {
                    let a: i8 = if rng.random::<bool>() { 1 } else { -1 };
                    let b = if c.x() * c.z() == 1 { -a } else { a };
                    (Outcome::from_sign(a), Outcome::from_sign(b))
                } else {
                    signs(DeterministicStrategy::from_index(mix.sample(rng)))
                }
            }
            Sampler::Quantum { correlators, eta } => {
                let e = correlators[c.index()];
                let product: i8 = if rng.random::<f64>() < (1.0 + e) / 2.0 { 1 } else { -1 };
                let a: i8 = if rng.random::<bool>() { 1 } else { -1 };
                let b = product * a;
                let mut click = |o: i8| {
                    if *eta >= 1.0 || rng.random::<f64>() < *eta {
                        Outcome::from_sign(o)
                    } else {
                        Outcome::NoClick
                    }
                };
                let oa = click(a);
                let ob = click(b);
                (oa, ob)
            }
            Sampler::PrBox => {
                let a: i8 = if rng.random::<bool>() { 1 } else { -1 };
                let b = if c.x() * c.z() == 1 { -a } else { a };
                (Outcome::from_sign(a), Outcome::from_sign(b))
            }
        }
    }
}

impl Iterator for Generator {
    type Item = MeasurementRecord;

    fn next(&mut self) -> Option<MeasurementRecord> {
        if self.next >= self.total {
            return None;
        }
        let t = self.next;
        self.next += 1;
        let c = self.context(t);
        let (a, b) = self.sample(c);
        Some(MeasurementRecord::new(t, c, a, b))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

/// Generated trials together with the generating model's ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub records: Vec<MeasurementRecord>,
    pub label: GroundTruth,
}

pub fn generate(config: &GeneratorConfig) -> Result<GeneratedDataset> {
    let records = Generator::new(config)?.collect();
    Ok(GeneratedDataset { records, label: config.model.label() })
}

/// `v·cos(θA_x − θB_z)` in canonical context order.
pub fn singlet_correlators(visibility: f64, angles: &Angles) -> [f64; 4] {
    Context::ALL.map(|c| {
        visibility * (angles.alice[usize::from(c.x())] - angles.bob[usize::from(c.z())]).cos()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::{chsh_s, summarize};

    #[test]
    fn sixteen_strategies_bounded_by_two() {
        let all = enumerate_strategies();
        assert_eq!(all.len(), 16);
        let distinct: std::collections::HashSet<_> = all.iter().map(|(s, _)| *s).collect();
        assert_eq!(distinct.len(), 16);
        assert!(all.iter().all(|(_, s)| *s == 2 || *s == -2));
        assert_eq!(all.iter().map(|(_, s)| s.abs()).max(), Some(2));
        assert_eq!(DeterministicStrategy::new(1, 1, 1, 1).unwrap().chsh(), 2);
        // (a0, a1, b0, b1) = (+1, −1, +1, +1)
        assert_eq!(DeterministicStrategy::new(1, -1, 1, 1).unwrap().chsh(), 2);
        assert!(DeterministicStrategy::new(1, 0, 1, 1).is_err());
    }

    #[test]
    fn biased_mixture_correlators() {
        let e = MixtureWeights::Biased { bias: 1.0 }.expected_correlators().unwrap();
        for (got, want) in e.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        let e = MixtureWeights::Biased { bias: 0.0 }.expected_correlators().unwrap();
        assert!(e.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            ModelConfig::LhvDetection { eta: 0.0, angles: Angles::default() },
            ModelConfig::LhvCommunication { kappa: 1.5, weights: MixtureWeights::default() },
            ModelConfig::QuantumSinglet { visibility: 1.2, eta: 1.0, angles: Angles::default() },
            ModelConfig::LhvMixture { weights: MixtureWeights::Explicit(vec![0.5; 16]) },
            ModelConfig::LhvMemory { weights: MixtureWeights::default(), order: 0 },
        ];
        for m in bad {
            assert!(Generator::new(&GeneratorConfig::new(m, 10, 1)).is_err());
        }
        let mut cfg = GeneratorConfig::new(ModelConfig::PrBox {}, 10, 1);
        cfg.seed = None;
        assert_eq!(generate(&cfg).unwrap_err().to_string(), "config error: seed required");
    }

    #[test]
    fn pr_box_reaches_four() {
        for seed in 0..5 {
            let d = generate(&GeneratorConfig::new(ModelConfig::PrBox {}, 50, seed)).unwrap();
            let s = summarize::<f64>(&d.records).unwrap();
            assert_eq!(chsh_s(&s), 4.0);
            assert_eq!(d.label, GroundTruth::Quantum);
        }
    }

    #[test]
    fn round_robin_and_indices() {
        let d = generate(&GeneratorConfig::new(ModelConfig::PrBox {}, 3, 0)).unwrap();
        assert_eq!(d.records.len(), 12);
        for (t, r) in d.records.iter().enumerate() {
            assert_eq!(r.trial_index, t as u64);
            assert_eq!(r.context.index(), t % 4);
        }
    }

    #[test]
    fn reproducible_per_seed() {
        let m = ModelConfig::LhvDetection { eta: 0.8, angles: Angles::default() };
        let a = generate(&GeneratorConfig::new(m.clone(), 200, 9)).unwrap().records;
        let b = generate(&GeneratorConfig::new(m.clone(), 200, 9)).unwrap().records;
        let c = generate(&GeneratorConfig::new(m, 200, 10)).unwrap().records;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn memory_flips_preserve_products() {
        let weights = MixtureWeights::Explicit({
            let mut w = vec![0.0; 16];
            w[0] = 1.0;
            w
        });
        let cfg = GeneratorConfig::new(ModelConfig::LhvMemory { weights, order: 1 }, 100, 3);
        let d = generate(&cfg).unwrap();
        // strategy 0 is all +1: every product is +1 whatever the flip state
        assert!(d.records.iter().all(|r| r.product() == Some(1)));
    }

    #[test]
    fn uniform_schedule_covers_contexts() {
        let mut cfg = GeneratorConfig::new(ModelConfig::PrBox {}, 100, 4);
        cfg.schedule = Schedule::Uniform;
        let d = generate(&cfg).unwrap();
        let s = summarize::<f64>(&d.records).unwrap();
        assert!(s.n_total.iter().all(|n| *n > 50));
        assert!(s.n_total.iter().any(|n| *n != 100));
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<_> =
            (0..3).flat_map(|s| (0..100).map(move |i| derive_seed(7, s, i))).collect();
        assert_eq!(seeds.len(), 300);
    }
}
