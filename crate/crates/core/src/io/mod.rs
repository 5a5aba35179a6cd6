//! Ingestion, report serialization and SVG charts.

mod ingest;
mod report;
mod svg;

pub use ingest::{digest, ingest, ingest_bytes, IngestionSpec};
pub use report::{
    emit_report, parse_report, write_atomic, ComparisonReport, Format, ModelReport, ReportDocument,
    ReportMetadata, COMPARISON_COLUMNS, CURVE_COLUMNS,
};
pub use svg::{render_svg, Panel, SvgStyle, STYLE};
