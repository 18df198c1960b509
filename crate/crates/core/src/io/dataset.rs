//! Trial CSV: header `trial,x,z,a,b`, outcomes `-1`, `1`, or `0` for no click.
//!
//! Lines starting with `#` carry metadata. `# key: value` lines are free-form
//! entries and `# config| ...` lines hold the generating configuration.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::chsh::{Context, MeasurementRecord, Outcome};
use crate::error::{Result, TaraError};

pub const HEADER: &str = "trial,x,z,a,b";
const CONFIG_PREFIX: &str = "config|";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
    /// Generator configuration echo, one TOML document.
    pub config: Option<String>,
}

impl Metadata {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn parse_config<T: DeserializeOwned>(&self) -> Result<Option<T>> {
        self.config.as_deref().map(super::config::parse_config).transpose()
    }

    fn absorb(&mut self, comment: &str) {
        let body = comment.trim_start_matches('#');
        let body = body.strip_prefix(' ').unwrap_or(body);
        if let Some(line) = body.strip_prefix(CONFIG_PREFIX) {
            let line = line.strip_prefix(' ').unwrap_or(line);
            let cfg = self.config.get_or_insert_with(String::new);
            cfg.push_str(line);
            cfg.push('\n');
        } else if let Some((k, v)) = body.split_once(':') {
            self.entries.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<MeasurementRecord>,
    pub metadata: Metadata,
}

pub fn write_dataset_to(mut w: impl Write, records: &[MeasurementRecord], metadata: &Metadata) -> std::io::Result<()> {
    for (k, v) in &metadata.entries {
        writeln!(w, "# {k}: {v}")?;
    }
    if let Some(cfg) = &metadata.config {
        for line in cfg.lines() {
            writeln!(w, "# {CONFIG_PREFIX} {line}")?;
        }
    }
    writeln!(w, "{HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.trial_index,
            r.context.x(),
            r.context.z(),
            r.a.code(),
            r.b.code()
        )?;
    }
    w.flush()
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[MeasurementRecord], metadata: &Metadata) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| TaraError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    write_dataset_to(BufWriter::new(file), records, metadata).map_err(io_err)
}

/// Streams records from a trial CSV; metadata is collected as comment lines are passed.
pub struct RecordReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
    header_seen: bool,
    last_trial: Option<u64>,
    pub metadata: Metadata,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        RecordReader { lines: reader.lines(), line: 0, header_seen: false, last_trial: None, metadata: Metadata::default() }
    }

    fn parse_error(&self, message: impl Into<String>) -> TaraError {
        TaraError::Parse { line: self.line, message: message.into() }
    }

    fn parse_row(&mut self, row: &str) -> Result<MeasurementRecord> {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(self.parse_error(format!("expected 5 fields, found {}", fields.len())));
        }
        let trial: u64 = fields[0].parse().map_err(|_| self.parse_error("trial is not a non-negative integer"))?;
        let setting = |name: &str, s: &str| -> Result<u8> {
            match s.parse::<i64>() {
                Ok(v @ 0..=1) => Ok(v as u8),
                Ok(_) => Err(self.parse_error(format!("{name} out of range"))),
                Err(_) => Err(self.parse_error(format!("{name} is not an integer"))),
            }
        };
        let x = setting("x", fields[1])?;
        let z = setting("z", fields[2])?;
        let outcome = |name: &str, s: &str| -> Result<Outcome> {
            let code: i8 = s.parse().map_err(|_| self.parse_error(format!("{name} is not an integer")))?;
            Outcome::from_code(code).ok_or_else(|| self.parse_error(format!("{name} out of range")))
        };
        let a = outcome("a", fields[3])?;
        let b = outcome("b", fields[4])?;
        if let Some(last) = self.last_trial {
            if trial <= last {
                return Err(self.parse_error("trial indices must be strictly increasing"));
            }
        }
        self.last_trial = Some(trial);
        Ok(MeasurementRecord::new(trial, Context::new(x, z)?, a, b))
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<MeasurementRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let raw = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(TaraError::Io { path: format!("line {}", self.line + 1), source: e })),
            };
            self.line += 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                self.metadata.absorb(line);
                continue;
            }
            if !self.header_seen {
                let header: String = line.chars().filter(|c| !c.is_whitespace()).collect();
                if header != HEADER {
                    return Some(Err(self.parse_error(format!("expected header `{HEADER}`"))));
                }
                self.header_seen = true;
                continue;
            }
            return Some(self.parse_row(line));
        }
    }
}

pub fn parse_dataset(reader: impl BufRead) -> Result<Dataset> {
    let mut rr = RecordReader::new(reader);
    let records = rr.by_ref().collect::<Result<Vec<_>>>()?;
    if !rr.header_seen {
        return Err(TaraError::Parse { line: rr.line, message: format!("missing header `{HEADER}`") });
    }
    Ok(Dataset { records, metadata: rr.metadata })
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| TaraError::Io { path: path.display().to_string(), source })?;
    parse_dataset(BufReader::new(file))
}
