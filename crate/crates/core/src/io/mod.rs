//! Dataset, config and model persistence.

pub mod adapter;
pub mod config;
pub mod dataset;
pub mod model;

pub use adapter::{read_mapped_csv, read_mapped_file, ColumnMap, ColumnMapping};
pub use config::{parse_config, parse_generator_config, read_config, read_generator_config, to_config_string, write_config};
pub use dataset::{parse_dataset, read_dataset, write_dataset, write_dataset_to, Dataset, Metadata, RecordReader, HEADER};
pub use model::{CalibrationModel, EnvelopeArtifact, SCHEMA_VERSION};
