//! Stage-tagged feed loading: read, repair, and align the input CSVs.
//!
//! Every failure is wrapped with the pipeline stage it occurred in, so the
//! binary can emit a single-line diagnostic like
//! `align: missing feature: price`.

use std::fmt;
use std::fs::File;
use std::path::Path;

use stakecast::{align, read_feed, repair_gaps, DailySeries, Error, FeatureFrame, FeedSchema};

use crate::RunConfig;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Align,
    Fit,
    Eval,
    Synth,
    Report,
}

impl Stage {
    fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Align => "align",
            Stage::Fit => "fit",
            Stage::Eval => "eval",
            Stage::Synth => "synth",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A failure annotated with its pipeline stage.
#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, message: impl fmt::Display) -> Self {
        Self {
            stage,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// The stage a backtest-internal error belongs to: model construction
/// failures count as fitting, split and metric failures as evaluation.
pub fn fit_or_eval_stage(err: &Error) -> Stage {
    match err {
        Error::FrameTooShort { .. }
        | Error::MissingFeature(_)
        | Error::DegenerateSystem
        | Error::DimensionMismatch { .. }
        | Error::InsufficientHistory { .. }
        | Error::InvalidSpec(_) => Stage::Fit,
        _ => Stage::Eval,
    }
}

/// Resolves the value column: the explicit flag if given, otherwise the
/// single non-date column of the file's header.
fn resolve_schema(path: &Path, config: &RunConfig) -> Result<FeedSchema, CliError> {
    let ingest = |e: &dyn fmt::Display| CliError::new(Stage::Ingest, e);
    if let Some(value_column) = &config.value_column {
        return FeedSchema::new(&config.date_column, value_column).map_err(|e| ingest(&e));
    }
    let file = File::open(path).map_err(|e| ingest(&format!("{}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| ingest(&format!("{}: {e}", path.display())))?;
    let candidates: Vec<&str> = headers
        .iter()
        .map(str::trim)
        .filter(|h| *h != config.date_column)
        .collect();
    match candidates.as_slice() {
        [value] => FeedSchema::new(&config.date_column, *value).map_err(|e| ingest(&e)),
        _ => Err(ingest(&format!(
            "{}: cannot infer value column from header ({}); use --value-column",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        ))),
    }
}

fn load_feed(path: &Path, config: &RunConfig) -> Result<DailySeries, CliError> {
    let schema = resolve_schema(path, config)?;
    let raw = read_feed(path, &schema).map_err(|e| CliError::new(Stage::Ingest, e))?;
    repair_gaps(&raw, config.max_gap).map_err(|e| CliError::new(Stage::Ingest, e))
}

/// Reads, repairs, and aligns the configured feeds, and checks up front that
/// every requested method will find its features in the frame.
pub fn load_frame(config: &RunConfig) -> Result<FeatureFrame, CliError> {
    let rewards = load_feed(&config.rewards, config)?;
    let price = config
        .price
        .as_deref()
        .map(|p| load_feed(p, config))
        .transpose()?;
    let trends = config
        .trends
        .as_deref()
        .map(|p| load_feed(p, config))
        .transpose()?;

    let frame = align(&rewards, price.as_ref(), trends.as_ref())
        .map_err(|e| CliError::new(Stage::Align, e))?;

    for &method in &config.methods {
        for &kind in method.features() {
            if !frame.has(kind) {
                return Err(CliError::new(Stage::Align, Error::MissingFeature(kind)));
            }
        }
    }
    Ok(frame)
}
