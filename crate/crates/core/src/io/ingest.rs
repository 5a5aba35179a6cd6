use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

/// Where and how to read a delimited file of outcomes and model risks.
///
/// Without a header row, columns are addressed by 1-based position (`"1"`, `"2"`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct IngestionSpec {
    pub path: PathBuf,
    pub outcome_column: String,
    pub model_columns: Vec<String>,
    pub delimiter: u8,
    pub header: bool,
}

impl IngestionSpec {
    pub fn new(path: impl Into<PathBuf>, outcome_column: impl Into<String>, model_columns: Vec<String>) -> Self {
        IngestionSpec {
            path: path.into(),
            outcome_column: outcome_column.into(),
            model_columns,
            delimiter: b',',
            header: true,
        }
    }
}

/// Hex SHA-256 of the input bytes.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn ingest(spec: &IngestionSpec) -> Result<Vec<PredictionSet>> {
    let bytes = std::fs::read(&spec.path).map_err(|e| Error::Ingestion {
        row: None,
        column: String::new(),
        message: format!("cannot read {}: {e}", spec.path.display()),
    })?;
    ingest_bytes(&bytes, spec)
}

/// Parses already-loaded file contents; `spec.path` is only used in messages.
pub fn ingest_bytes(bytes: &[u8], spec: &IngestionSpec) -> Result<Vec<PredictionSet>> {
    if spec.model_columns.is_empty() {
        return Err(Error::Usage("at least one model column is required".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(spec.header)
        .flexible(true)
        .from_reader(bytes);

    let headers: Vec<String> = if spec.header {
        reader
            .headers()
            .map_err(|e| csv_error(None, e))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect()
    } else {
        Vec::new()
    };
    let locate = |name: &str| -> Result<usize> {
        let found = if spec.header {
            headers.iter().position(|h| h == name)
        } else {
            name.parse::<usize>().ok().filter(|&i| i >= 1).map(|i| i - 1)
        };
        found.ok_or_else(|| Error::Ingestion {
            row: None,
            column: name.to_string(),
            message: "column not found".into(),
        })
    };
    let outcome_idx = locate(&spec.outcome_column)?;
    let model_idx = spec
        .model_columns
        .iter()
        .map(|m| locate(m))
        .collect::<Result<Vec<_>>>()?;

    let mut outcomes = Vec::new();
    let mut risks: Vec<Vec<f64>> = vec![Vec::new(); model_idx.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(Some(row), e))?;
        let field = |idx: usize, column: &str| -> Result<&str> {
            match record.get(idx).map(str::trim) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(Error::Ingestion {
                    row: Some(row),
                    column: column.to_string(),
                    message: "missing value".into(),
                }),
            }
        };
        let y = field(outcome_idx, &spec.outcome_column)?;
        outcomes.push(match y {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Ingestion {
                    row: Some(row),
                    column: spec.outcome_column.clone(),
                    message: format!("outcome must be 0 or 1, got `{other}`"),
                })
            }
        });
        for ((&idx, name), column) in model_idx.iter().zip(&spec.model_columns).zip(risks.iter_mut()) {
            let raw = field(idx, name)?;
            let value: f64 = raw.parse().map_err(|_| Error::Ingestion {
                row: Some(row),
                column: name.clone(),
                message: format!("`{raw}` is not a number"),
            })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Ingestion {
                    row: Some(row),
                    column: name.clone(),
                    message: format!("risk {value} outside [0, 1]"),
                });
            }
            column.push(value);
        }
    }
    if outcomes.is_empty() {
        return Err(Error::Ingestion {
            row: None,
            column: spec.outcome_column.clone(),
            message: format!("{} contains no data rows", spec.path.display()),
        });
    }
    spec.model_columns
        .iter()
        .zip(risks)
        .map(|(name, r)| PredictionSet::new(name.clone(), r, outcomes.clone()))
        .collect()
}

fn csv_error(row: Option<usize>, e: csv::Error) -> Error {
    Error::Ingestion {
        row,
        column: String::new(),
        message: e.to_string(),
    }
}
