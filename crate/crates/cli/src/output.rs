use std::fmt;
use std::io::Write;
use std::path::Path;

use tara_core::TaraError;

use crate::args::{Global, OutputFormat};
use crate::{EXIT_RUNTIME, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Tara(TaraError),
    Output(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Tara(e) if e.is_usage() => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Tara(e) => write!(f, "{e}"),
            CliError::Output(e) => write!(f, "writing output: {e}"),
        }
    }
}

impl From<TaraError> for CliError {
    fn from(e: TaraError) -> Self {
        CliError::Tara(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.into())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// The run's seed and where it came from. An explicit flag wins over
/// `TARA_SEED`, which wins over a seed in a config file.
pub fn resolve_seed(global: &Global, from_config: Option<u64>) -> Result<(u64, &'static str), CliError> {
    if let Some(s) = global.seed {
        return Ok((s, "flag"));
    }
    if let Ok(raw) = std::env::var("TARA_SEED") {
        let s = raw.trim().parse().map_err(|_| usage(format!("TARA_SEED={raw} is not an unsigned integer")))?;
        return Ok((s, "TARA_SEED"));
    }
    Ok(match from_config {
        Some(s) => (s, "config"),
        None => (0, "default"),
    })
}

/// Resolved configuration, printed as `#` lines ahead of results.
pub struct Echo {
    lines: Vec<String>,
}

impl Echo {
    pub fn new(command: &str) -> Self {
        Echo { lines: vec![format!("tara {command}")] }
    }

    pub fn add(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.lines.push(format!("{key}: {value}"));
        self
    }

    pub fn seed(&mut self, (seed, source): (u64, &str)) -> &mut Self {
        self.add("seed", format!("{seed} ({source})"))
    }

    /// Embeds a TOML document line by line.
    pub fn document(&mut self, text: &str) -> &mut Self {
        self.lines.extend(text.lines().map(|l| format!("config| {l}")));
        self
    }

    pub fn print(&self, out: &mut impl Write) -> std::io::Result<()> {
        for l in &self.lines {
            writeln!(out, "# {l}")?;
        }
        Ok(())
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, format: OutputFormat, out: &mut impl Write) -> Result<(), CliError> {
        match format {
            OutputFormat::Table => self.write_aligned(out)?,
            OutputFormat::Csv => self.write_csv(out)?,
        }
        Ok(())
    }

    fn write_aligned(&self, out: &mut impl Write) -> std::io::Result<()> {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(self.header.clone()))?;
        for row in &self.rows {
            writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut impl Write) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path)
            .map_err(|source| TaraError::Io { path: path.display().to_string(), source })?;
        self.write_csv(&mut std::io::BufWriter::new(file))?;
        Ok(())
    }
}

/// Two-column key/value output: `key=value` lines as a table, `key,value` rows as CSV.
pub fn write_pairs(pairs: &[(String, String)], format: OutputFormat, out: &mut impl Write) -> Result<(), CliError> {
    match format {
        OutputFormat::Table => {
            for (k, v) in pairs {
                writeln!(out, "{k}={v}")?;
            }
        }
        OutputFormat::Csv => {
            let mut t = Table::new(vec!["key", "value"]);
            for (k, v) in pairs {
                t.push(vec![k.clone(), v.clone()]);
            }
            t.write_csv(out)?;
        }
    }
    Ok(())
}

pub fn verbose(global: &Global, msg: impl fmt::Display) {
    if global.verbose {
        eprintln!("{msg}");
    }
}
