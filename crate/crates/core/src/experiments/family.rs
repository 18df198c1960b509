//! Parameterized generator families used by the experiment harnesses.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{derive_seed, generate, DeterministicStrategy, GeneratedDataset, GeneratorConfig, MixtureWeights, ModelConfig, Schedule};
use crate::error::{Result, TaraError};

/// A fixed value or a `[lo, hi]` range sampled uniformly per dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Fixed(f64),
    Range([f64; 2]),
}

impl Param {
    fn sample(self, rng: &mut impl Rng) -> f64 {
        match self {
            Param::Fixed(v) => v,
            Param::Range([lo, hi]) if lo == hi => lo,
            Param::Range([lo, hi]) => rng.random_range(lo..=hi),
        }
    }

    fn validate(self, name: &str) -> Result<()> {
        match self {
            Param::Fixed(v) if v.is_finite() => Ok(()),
            Param::Range([lo, hi]) if lo.is_finite() && hi.is_finite() && lo <= hi => Ok(()),
            _ => Err(TaraError::config(format!("bad range for {name}"))),
        }
    }
}

/// One generator kind with parameter ranges and a share of the family's datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyMember {
    pub kind: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

fn unit_weight() -> f64 {
    1.0
}

impl FamilyMember {
    pub fn new(kind: &str) -> Self {
        FamilyMember { kind: kind.to_owned(), weight: 1.0, bias: None, eta: None, kappa: None, visibility: None, order: None }
    }

    fn allowed(&self) -> &'static [&'static str] {
        match self.kind.as_str() {
            "lhv-deterministic" | "pr-box" => &[],
            "lhv-mixture" => &["bias"],
            "lhv-detection" => &["eta"],
            "lhv-memory" => &["bias", "order"],
            "lhv-communication" => &["bias", "kappa"],
            "quantum-singlet" => &["visibility", "eta"],
            _ => &[],
        }
    }

    pub fn validate(&self) -> Result<()> {
        const KINDS: [&str; 7] = [
            "lhv-deterministic",
            "lhv-mixture",
            "lhv-detection",
            "lhv-memory",
            "lhv-communication",
            "quantum-singlet",
            "pr-box",
        ];
        if !KINDS.contains(&self.kind.as_str()) {
            return Err(TaraError::config(format!("unknown model kind `{}`", self.kind)));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(TaraError::config(format!("{}: weight must be positive", self.kind)));
        }
        let given = [
            ("bias", self.bias),
            ("eta", self.eta),
            ("kappa", self.kappa),
            ("visibility", self.visibility),
        ];
        for (name, p) in given {
            if let Some(p) = p {
                if !self.allowed().contains(&name) {
                    return Err(TaraError::config(format!("{}: `{name}` does not apply", self.kind)));
                }
                p.validate(name)?;
            }
        }
        if self.order.is_some() && !self.allowed().contains(&"order") {
            return Err(TaraError::config(format!("{}: `order` does not apply", self.kind)));
        }
        if self.kind == "lhv-detection" && self.eta.is_none() {
            return Err(TaraError::config("lhv-detection: `eta` required"));
        }
        if self.kind == "lhv-communication" && self.kappa.is_none() {
            return Err(TaraError::config("lhv-communication: `kappa` required"));
        }
        Ok(())
    }

    /// Draws one concrete generator model.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<ModelConfig> {
        self.validate()?;
        let mut draw = |p: Option<Param>, default: f64| p.map_or(default, |p| p.sample(rng));
        let model = match self.kind.as_str() {
            "lhv-deterministic" => {
                let s = DeterministicStrategy::from_index(rng.random_range(0..16));
                ModelConfig::LhvDeterministic { strategy: [s.alice(0), s.alice(1), s.bob(0), s.bob(1)] }
            }
            "lhv-mixture" => ModelConfig::LhvMixture { weights: MixtureWeights::Biased { bias: draw(self.bias, 1.0) } },
            "lhv-detection" => ModelConfig::LhvDetection { eta: draw(self.eta, 1.0), angles: Default::default() },
            "lhv-memory" => ModelConfig::LhvMemory {
                weights: MixtureWeights::Biased { bias: draw(self.bias, 1.0) },
                order: self.order.unwrap_or(1),
            },
            "lhv-communication" => {
                let kappa = draw(self.kappa, 0.0);
                ModelConfig::LhvCommunication { kappa, weights: MixtureWeights::Biased { bias: draw(self.bias, 1.0) } }
            }
            "quantum-singlet" => {
                let visibility = draw(self.visibility, 1.0);
                ModelConfig::QuantumSinglet { visibility, eta: draw(self.eta, 1.0), angles: Default::default() }
            }
            _ => ModelConfig::PrBox {},
        };
        model.validate()?;
        Ok(model)
    }
}

/// Weighted list of members; dataset `i` of `n` goes to the member whose
/// cumulative-weight interval contains `(i + 1/2)/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Family(pub Vec<FamilyMember>);

impl Family {
    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(TaraError::config("family has no members"));
        }
        self.0.iter().try_for_each(FamilyMember::validate)
    }

    fn member_for(&self, index: usize, count: usize) -> &FamilyMember {
        let total: f64 = self.0.iter().map(|m| m.weight).sum();
        let u = (index as f64 + 0.5) / count as f64 * total;
        let mut acc = 0.0;
        for m in &self.0 {
            acc += m.weight;
            if u < acc {
                return m;
            }
        }
        self.0.last().expect("validated non-empty")
    }

    /// Dataset `index` of a batch of `count` drawn with seed stream `stream`.
    pub fn dataset(
        &self,
        seed: u64,
        stream: u64,
        index: usize,
        count: usize,
        trials_per_context: u64,
    ) -> Result<(ModelConfig, GeneratedDataset)> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index as u64));
        let model = self.member_for(index, count).sample(&mut rng)?;
        let config = GeneratorConfig {
            seed: Some(rng.next_u64()),
            trials_per_context,
            schedule: Schedule::RoundRobin,
            model: model.clone(),
        };
        Ok((model, generate(&config)?))
    }
}
