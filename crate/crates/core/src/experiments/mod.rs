//! Experiment harnesses: ROC ablation, calibration leakage and hardware reports.

pub mod ablation;
pub mod family;
pub mod hardware;
pub mod leakage;
pub mod pipeline;
pub mod roc;

pub use ablation::{ablation_study, AblationConfig, AblationResult, AblationRow};
pub use family::{Family, FamilyMember, Param};
pub use hardware::{hardware_report, BatchVerdict, Detectors, HardwareReport, StreamVerdict};
pub use leakage::{leakage_experiment, ConditionResult, LeakageConfig, LeakageReport};
pub use roc::{auc_rank, auc_standard_error, cohens_d, roc, RocResult, FPR_GRID};
