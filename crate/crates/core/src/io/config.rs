//! TOML configuration files. Unknown keys are rejected by the config types.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::datagen::GeneratorConfig;
use crate::error::{Result, TaraError};

pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| TaraError::config(e.message().to_string()))
}

pub fn to_config_string<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| TaraError::config(e.to_string()))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| TaraError::Io { path: path.display().to_string(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| TaraError::Io { path: path.display().to_string(), source })
}

pub fn read_config<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    parse_config(&read_text(path.as_ref())?)
}

pub fn write_config<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_text(path.as_ref(), &to_config_string(value)?)
}

/// Parses and validates a generator config; a missing seed is an error.
pub fn parse_generator_config(text: &str) -> Result<GeneratorConfig> {
    let config: GeneratorConfig = parse_config(text)?;
    config.validate()?;
    Ok(config)
}

pub fn read_generator_config(path: impl AsRef<Path>) -> Result<GeneratorConfig> {
    parse_generator_config(&read_text(path.as_ref())?)
}
