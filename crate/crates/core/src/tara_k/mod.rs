//! Batch detector: dataset features, KS statistics, the elliptic envelope and
//! the OR decision rule.

pub mod calibrate;
pub mod detect;
pub mod envelope;
pub mod features;
pub mod ks;

pub use calibrate::{calibrate_detector, CalibrateOptions, DetectorArtifacts};
pub use detect::{detect_batch, BatchReport, Decision};
pub use envelope::{fit_envelope, EnvelopeConfig, EnvelopeModel, Standardization};
pub use features::{extract_features, ExtractedFeatures, FeatureSubset, FeatureVector, DEFAULT_SET_ALPHA, FEATURE_NAMES};
pub use ks::{ks_critical_value, ks_threshold, ks_two_sample, ks_uniform, ks_uniform_threshold};
