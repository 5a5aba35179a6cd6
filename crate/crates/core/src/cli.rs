//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 data or validation error,
//! 3 internal invariant violation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::comparison::compare_models;
use crate::curves::{decision_curve, generate_synthetic, miscalibration_scan, RiskDistribution, SyntheticSpec, ThresholdGrid};
use crate::equivalences::ppv_bounds_given_nb;
use crate::error::{Error, Result};
use crate::io::{
    digest, emit_report, ingest_bytes, render_svg, write_atomic, ComparisonReport, Format, IngestionSpec,
    ModelReport, Panel, ReportDocument, ReportMetadata,
};
use crate::metrics::{PredictionSet, Threshold};
use crate::resampling::{bootstrap_bands, BandMethod, BandSpec};

#[derive(Debug, Parser)]
#[command(name = "netbenefit", version, about = "Decision curves, PPV curves and threshold calibration diagnostics")]
struct Cli {
    /// Threshold grid as lo:hi:step
    #[arg(long, global = true, default_value = "0.01:0.50:0.01", value_parser = parse_grid)]
    grid: ThresholdGrid,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decision, PPV and calibration curves for one or more models
    Curves {
        #[command(flatten)]
        input: InputArgs,
        /// Directory for decision.svg, ppv.svg and calibration.svg
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Pairwise net benefit verdicts for exactly two model columns
    Compare {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Feasible PPV range for a net benefit value
    Bounds {
        #[arg(long, allow_negative_numbers = true)]
        nb: f64,
        #[arg(long)]
        prevalence: f64,
        #[arg(long)]
        t: f64,
    },
    /// Curves with percentile bootstrap bands
    Bootstrap {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Simulate a logit-shifted model and list where it loses to treat-none or treat-all
    DemoMiscalibration {
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        shift: f64,
        #[arg(long, default_value_t = 20000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// `uniform` or `beta:A:B`
        #[arg(long, default_value = "beta:2:5", value_parser = parse_distribution)]
        distribution: RiskDistribution,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Outcome column (values 0/1)
    #[arg(long)]
    outcome: String,
    /// Comma-separated risk columns
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<String>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The file has no header row; columns are 1-based positions
    #[arg(long)]
    no_header: bool,
}

fn parse_grid(s: &str) -> std::result::Result<ThresholdGrid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_distribution(s: &str) -> std::result::Result<RiskDistribution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI with explicit arguments (including the program name) and
/// output streams, returning the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let Cli { grid, format, out, command } = cli;
    let bytes = match command {
        Command::Curves { input, svg } => {
            let (sets, mut metadata) = load(&input, grid)?;
            metadata.options.insert("command".into(), "curves".into());
            let doc = ReportDocument {
                metadata,
                models: model_reports(&sets, &grid, None)?,
                comparisons: Vec::new(),
            };
            if let Some(dir) = svg {
                write_svgs(&doc, &dir)?;
            }
            emit_report(&doc, format)?
        }
        Command::Compare { input } => {
            if input.models.len() != 2 {
                return Err(Error::Usage(format!(
                    "compare needs exactly two model columns, got {}",
                    input.models.len()
                )));
            }
            let (sets, mut metadata) = load(&input, grid)?;
            metadata.options.insert("command".into(), "compare".into());
            let verdicts = grid
                .thresholds::<f64>()
                .iter()
                .map(|t| compare_models(&sets[0], &sets[1], t))
                .collect::<Result<Vec<_>>>()?;
            let doc = ReportDocument {
                metadata,
                models: model_reports(&sets, &grid, None)?,
                comparisons: vec![ComparisonReport {
                    model1: sets[0].name().to_string(),
                    model2: sets[1].name().to_string(),
                    verdicts,
                }],
            };
            emit_report(&doc, format)?
        }
        Command::Bounds { nb, prevalence, t } => {
            let t = Threshold::<f64>::from_real(t)?;
            if !nb.is_finite() {
                return Err(Error::domain("net benefit", "finite reals", nb));
            }
            let interval = ppv_bounds_given_nb(&nb, &prevalence, &t)?;
            match format {
                Format::Json => json(&interval)?,
                Format::Csv => {
                    let kind = serde_json::to_value(interval.kind)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default();
                    format!(
                        "t,nb,lower,upper,kind\n{},{},{},{},{}\n",
                        interval.t.value(),
                        interval.nb,
                        interval.lower,
                        interval.upper,
                        kind
                    )
                    .into_bytes()
                }
            }
        }
        Command::Bootstrap { input, replicates, seed, level, svg } => {
            let spec = BandSpec {
                replicates,
                seed,
                level,
                method: BandMethod::Percentile,
            };
            spec.validate()?;
            let (sets, mut metadata) = load(&input, grid)?;
            metadata.options.insert("command".into(), "bootstrap".into());
            metadata.options.insert("replicates".into(), replicates.to_string());
            metadata.options.insert("seed".into(), seed.to_string());
            metadata.options.insert("level".into(), level.to_string());
            let doc = ReportDocument {
                metadata,
                models: model_reports(&sets, &grid, Some(&spec))?,
                comparisons: Vec::new(),
            };
            if let Some(dir) = svg {
                write_svgs(&doc, &dir)?;
            }
            emit_report(&doc, format)?
        }
        Command::DemoMiscalibration { shift, n, seed, distribution } => {
            let spec = SyntheticSpec {
                n,
                seed,
                risk_distribution: distribution,
                logit_shift: shift,
                label: format!("shift{shift:+}"),
            };
            let (_, reported) = generate_synthetic(&spec)?;
            let scan = miscalibration_scan(&reported, &grid)?;
            match format {
                Format::Json => json(&DemoOutput { spec: &spec, grid, scan: &scan })?,
                Format::Csv => {
                    let mut s = String::from("t,nb,nb_all,s_t,y_above,y_below,region\n");
                    let rows = scan
                        .worse_than_none
                        .iter()
                        .map(|p| (p, "worse_than_none"))
                        .chain(scan.worse_than_all.iter().map(|p| (p, "worse_than_all")));
                    for (p, region) in rows {
                        let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            p.t,
                            p.nb,
                            p.nb_all,
                            p.s_t,
                            o(p.y_above),
                            o(p.y_below),
                            region
                        ));
                    }
                    s.into_bytes()
                }
            }
        }
    };
    match out {
        Some(path) => write_atomic(&path, &bytes),
        None => stdout.write_all(&bytes).map_err(Error::from),
    }
}

#[derive(Serialize)]
struct DemoOutput<'a> {
    spec: &'a SyntheticSpec,
    grid: ThresholdGrid,
    scan: &'a crate::curves::MiscalibrationScan,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::Report(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn load(input: &InputArgs, grid: ThresholdGrid) -> Result<(Vec<PredictionSet>, ReportMetadata)> {
    if !input.delimiter.is_ascii() {
        return Err(Error::Usage("delimiter must be a single ASCII character".into()));
    }
    let spec = IngestionSpec {
        path: input.input.clone(),
        outcome_column: input.outcome.clone(),
        model_columns: input.models.clone(),
        delimiter: input.delimiter as u8,
        header: !input.no_header,
    };
    let bytes = std::fs::read(&spec.path).map_err(|e| Error::Ingestion {
        row: None,
        column: String::new(),
        message: format!("cannot read {}: {e}", spec.path.display()),
    })?;
    let sets = ingest_bytes(&bytes, &spec)?;
    let mut metadata = ReportMetadata::new(grid, Some(digest(&bytes)));
    metadata.options.insert("input".into(), spec.path.display().to_string());
    metadata.options.insert("outcome".into(), spec.outcome_column);
    metadata.options.insert("models".into(), spec.model_columns.join(","));
    Ok((sets, metadata))
}

fn model_reports(sets: &[PredictionSet], grid: &ThresholdGrid, bands: Option<&BandSpec>) -> Result<Vec<ModelReport>> {
    sets.iter()
        .map(|data| {
            Ok(ModelReport {
                name: data.name().to_string(),
                n: data.len(),
                prevalence: data.prevalence(),
                points: decision_curve(data, grid)?.points,
                band: bands.map(|spec| bootstrap_bands(data, grid, spec)).transpose()?,
            })
        })
        .collect()
}

fn write_svgs(doc: &ReportDocument, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for panel in [Panel::Decision, Panel::Ppv, Panel::Calibration] {
        let path = dir.join(format!("{}.svg", panel.file_stem()));
        write_atomic(&path, render_svg(doc, panel).as_bytes())?;
    }
    Ok(())
}
