use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comparison::ComparisonVerdict;
use crate::curves::{CurvePoint, ThresholdGrid};
use crate::error::{Error, Result};
use crate::resampling::CurveBand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    /// SHA-256 of the input file, when the report came from one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub grid: ThresholdGrid,
    #[serde(default)]
    pub options: BTreeMap<String, String>,
}

impl ReportMetadata {
    pub fn new(grid: ThresholdGrid, input_digest: Option<String>) -> Self {
        ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest,
            grid,
            options: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub n: u64,
    pub prevalence: f64,
    pub points: Vec<CurvePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<CurveBand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model1: String,
    pub model2: String,
    pub verdicts: Vec<ComparisonVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub metadata: ReportMetadata,
    pub models: Vec<ModelReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<ComparisonReport>,
}

pub const CURVE_COLUMNS: &[&str] = &[
    "model", "t", "tp", "fp", "tn", "fn", "s_t", "nb_model", "nb_all", "nb_none", "ppv",
    "ppv_none_ref", "ppv_all_ref", "beats_none", "beats_all", "y_above", "y_below", "p_above",
    "p_below", "delta_t", "enrichment", "calibration_term",
];

const BAND_COLUMNS: &[&str] = &[
    "nb_lower", "nb_upper", "ppv_lower", "ppv_upper", "ppv_replicates", "ppv_excluded",
];

pub const COMPARISON_COLUMNS: &[&str] = &[
    "model1", "model2", "t", "nb1", "nb2", "winner", "ppv1", "ppv_superiority_ref", "s1", "s2",
    "margin_above_1", "margin_above_2", "margin_below_1", "margin_below_2",
];

/// Serializes a report.
///
/// JSON is one object whose keys mirror the struct fields. CSV is one row per
/// (model, threshold); when comparisons are present a second table follows
/// after a blank line. Numbers use the shortest representation that parses
/// back to the same double; absent values are empty fields.
pub fn emit_report(doc: &ReportDocument, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(doc).map_err(|e| Error::Report(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => emit_csv(doc),
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<ReportDocument> {
    serde_json::from_slice(bytes).map_err(|e| Error::Report(e.to_string()))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn emit_csv(doc: &ReportDocument) -> Result<Vec<u8>> {
    let csv_err = |e: csv::Error| Error::Report(e.to_string());
    let with_band = doc.models.iter().any(|m| m.band.is_some());
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header: Vec<&str> = CURVE_COLUMNS.to_vec();
        if with_band {
            header.extend_from_slice(BAND_COLUMNS);
        }
        w.write_record(&header).map_err(csv_err)?;
        for model in &doc.models {
            for (j, p) in model.points.iter().enumerate() {
                let c = &p.calibration;
                let mut row = vec![
                    model.name.clone(),
                    num(*p.t.value()),
                    p.tp.to_string(),
                    p.fp.to_string(),
                    p.tn.to_string(),
                    p.fn_.to_string(),
                    num(p.s_t),
                    num(p.nb_model),
                    num(p.nb_all),
                    num(p.nb_none),
                    num(p.ppv),
                    num(p.ppv_none_ref),
                    opt(p.ppv_all_ref),
                    p.beats_none.to_string(),
                    p.beats_all.to_string(),
                    opt(c.y_above),
                    opt(c.y_below),
                    opt(c.p_above),
                    opt(c.p_below),
                    opt(c.delta_t),
                    opt(c.enrichment),
                    opt(c.calibration_term),
                ];
                if with_band {
                    match model.band.as_ref().and_then(|b| b.points.get(j)) {
                        Some(b) => row.extend([
                            num(b.nb_lower),
                            num(b.nb_upper),
                            opt(b.ppv_lower),
                            opt(b.ppv_upper),
                            b.ppv_replicates.to_string(),
                            b.ppv_excluded.to_string(),
                        ]),
                        None => row.extend(std::iter::repeat_n(String::new(), BAND_COLUMNS.len())),
                    }
                }
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        w.flush()?;
    }
    if !doc.comparisons.is_empty() {
        out.push(b'\n');
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(COMPARISON_COLUMNS).map_err(csv_err)?;
        for cmp in &doc.comparisons {
            for v in &cmp.verdicts {
                let winner = serde_json::to_value(v.winner)
                    .ok()
                    .and_then(|w| w.as_str().map(str::to_string))
                    .unwrap_or_default();
                w.write_record([
                    cmp.model1.clone(),
                    cmp.model2.clone(),
                    num(*v.t.value()),
                    num(v.nb1),
                    num(v.nb2),
                    winner,
                    num(v.ppv1),
                    opt(v.ppv_superiority_ref),
                    num(v.s1),
                    num(v.s2),
                    num(v.margin_above_1),
                    num(v.margin_above_2),
                    num(v.margin_below_1),
                    num(v.margin_below_2),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
    }
    Ok(out)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
