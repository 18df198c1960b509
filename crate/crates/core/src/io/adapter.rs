//! Ingests external CSVs through a column-mapping sidecar.
//!
//! ```toml
//! delimiter = ","
//!
//! [columns]
//! x = "alice_setting"
//! z = "bob_setting"
//! a = "alice_bit"
//! b = "bob_bit"
//! count = "shots"        # optional: each row stands for this many trials
//!
//! [values.a]
//! "0" = 1
//! "1" = -1
//! ```
//!
//! Columns without a value map are parsed as integers. Trials are numbered in
//! file order unless a `trial` column is mapped and no `count` column is.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{parse_config, read_text};
use crate::chsh::{Context, MeasurementRecord, Outcome};
use crate::error::{Result, TaraError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMap {
    pub x: String,
    pub z: String,
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub trial: Option<String>,
    #[serde(default)]
    pub count: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    #[serde(default = "comma")]
    pub delimiter: String,
    pub columns: ColumnMap,
    /// Per-role (`x`, `z`, `a`, `b`) maps from raw cell text to the canonical code.
    #[serde(default)]
    pub values: BTreeMap<String, BTreeMap<String, i64>>,
}

fn comma() -> String {
    ",".into()
}

impl ColumnMapping {
    pub fn parse(text: &str) -> Result<Self> {
        let m: ColumnMapping = parse_config(text)?;
        if m.delimiter.len() != 1 {
            return Err(TaraError::config("delimiter must be a single byte"));
        }
        if let Some(role) = m.values.keys().find(|k| !["x", "z", "a", "b"].contains(&k.as_str())) {
            return Err(TaraError::config(format!("value map for unknown role `{role}`")));
        }
        Ok(m)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    fn code(&self, role: &str, cell: &str, line: usize) -> Result<i64> {
        let cell = cell.trim();
        let err = |message: String| TaraError::Parse { line, message };
        match self.values.get(role) {
            Some(map) => map.get(cell).copied().ok_or_else(|| err(format!("{role}: unmapped value `{cell}`"))),
            None => cell.parse().map_err(|_| err(format!("{role} is not an integer"))),
        }
    }
}

pub fn read_mapped_csv(data: impl std::io::Read, mapping: &ColumnMapping) -> Result<Vec<MeasurementRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter.as_bytes()[0])
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(data);
    let headers = reader.headers().map_err(|e| TaraError::Parse { line: 1, message: e.to_string() })?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TaraError::config(format!("column `{name}` not found in header")))
    };
    let cols = &mapping.columns;
    let (ix, iz, ia, ib) = (column(&cols.x)?, column(&cols.z)?, column(&cols.a)?, column(&cols.b)?);
    let icount = cols.count.as_deref().map(column).transpose()?;
    let itrial = if icount.is_none() { cols.trial.as_deref().map(column).transpose()? } else { None };

    let mut records = Vec::new();
    let mut next_trial: u64 = 0;
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            TaraError::Parse { line, message: e.to_string() }
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| TaraError::Parse { line, message };
        let cell = |i: usize| row.get(i).unwrap_or("");
        let setting = |role: &str, i: usize| -> Result<u8> {
            match mapping.code(role, cell(i), line)? {
                v @ 0..=1 => Ok(v as u8),
                _ => Err(err(format!("{role} out of range"))),
            }
        };
        let outcome = |role: &str, i: usize| -> Result<Outcome> {
            let v = mapping.code(role, cell(i), line)?;
            i8::try_from(v).ok().and_then(Outcome::from_code).ok_or_else(|| err(format!("{role} out of range")))
        };
        let context = Context::new(setting("x", ix)?, setting("z", iz)?)?;
        let (a, b) = (outcome("a", ia)?, outcome("b", ib)?);
        let count: u64 = match icount {
            Some(i) => cell(i).parse().map_err(|_| err("count is not a non-negative integer".into()))?,
            None => 1,
        };
        if let Some(i) = itrial {
            let t: u64 = cell(i).parse().map_err(|_| err("trial is not a non-negative integer".into()))?;
            if !records.is_empty() && t < next_trial {
                return Err(err("trial indices must be strictly increasing".into()));
            }
            next_trial = t;
        }
        for _ in 0..count {
            records.push(MeasurementRecord::new(next_trial, context, a, b));
            next_trial += 1;
        }
    }
    Ok(records)
}

pub fn read_mapped_file(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<Vec<MeasurementRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| TaraError::Io { path: path.display().to_string(), source })?;
    read_mapped_csv(std::io::BufReader::new(file), mapping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::summarize;

    const MAPPING: &str = r#"
[columns]
x = "sa"
z = "sb"
a = "ra"
b = "rb"
count = "n"

[values.a]
"0" = 1
"1" = -1

[values.b]
"0" = 1
"1" = -1
"#;

    #[test]
    fn aggregated_counts_expand() {
        let mapping = ColumnMapping::parse(MAPPING).unwrap();
        let csv = "sa,sb,ra,rb,n\n0,0,0,0,3\n0,1,0,1,2\n1,0,1,1,1\n1,1,1,0,4\n";
        let records = read_mapped_csv(csv.as_bytes(), &mapping).unwrap();
        assert_eq!(records.len(), 10);
        assert!(records.windows(2).all(|w| w[0].trial_index < w[1].trial_index));
        let s = summarize::<f64>(&records).unwrap();
        assert_eq!(s.correlators, [1.0, -1.0, 1.0, -1.0]);
        assert_eq!(s.click_rates.p_empty, 0.0);
        assert_eq!(s.click_rates.p_ab, 1.0);
    }

    #[test]
    fn unmapped_value_reports_line() {
        let mapping = ColumnMapping::parse(MAPPING).unwrap();
        let csv = "sa,sb,ra,rb,n\n0,0,0,0,3\n0,1,7,1,2\n";
        let err = read_mapped_csv(csv.as_bytes(), &mapping).unwrap_err();
        assert!(matches!(err, TaraError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_column_and_unknown_role() {
        let mapping = ColumnMapping::parse(MAPPING).unwrap();
        assert!(read_mapped_csv("sa,sb,ra,n\n".as_bytes(), &mapping).is_err());
        assert!(ColumnMapping::parse("[columns]\nx='a'\nz='b'\na='c'\nb='d'\n[values.q]\n'1' = 1\n").is_err());
    }
}
