//! Quantum-versus-classical CHSH detection.
//!
//! Measurement trials are scored with split conformal p-values against a
//! local-hidden-variable (LHV) model. A batch detector combines dataset
//! features in a one-class elliptic envelope with a two-sample KS test, and a
//! streaming detector bets on the p-values with an anytime-valid martingale.
//!
//! The statistics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chsh;
pub mod conformal;
pub mod datagen;
pub mod error;
pub mod experiments;
pub mod io;
mod linalg;
pub mod scalar;
pub mod tara_k;
pub mod tara_m;

pub use chsh::{chsh_s, classify_regime, summarize, Context, MeasurementRecord, Outcome, Regime};
pub use datagen::{generate, GeneratorConfig, GroundTruth, ModelConfig};
pub use error::{Result, TaraError};
pub use scalar::Real;
pub use tara_k::{detect_batch, Decision};
pub use tara_m::{detect_stream, BettingStrategy};

pub type Summary = chsh::CorrelationSummary<f64>;
pub type LhvModel = conformal::LhvConditionalModel<f64>;
pub type Calibration = conformal::CalibrationSet<f64>;
pub type Scorer = conformal::ConformalScorer<f64>;
pub type Envelope = tara_k::EnvelopeModel<f64>;
pub type Features = tara_k::FeatureVector<f64>;
pub type Martingale = tara_m::MartingaleState<f64>;
pub type Roc = experiments::RocResult<f64>;
