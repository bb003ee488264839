//! CSV feed ingestion and deterministic synthetic series generation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::{DailySeries, RawSeries};

/// Column layout of a daily CSV feed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedSchema {
    pub date_column: String,
    pub value_column: String,
}

impl FeedSchema {
    /// Builds a schema; column names must be non-empty and distinct.
    pub fn new(date_column: impl Into<String>, value_column: impl Into<String>) -> Result<Self> {
        let date_column = date_column.into();
        let value_column = value_column.into();
        if date_column.is_empty() || value_column.is_empty() {
            return Err(Error::InvalidSpec("schema column names must be non-empty".into()));
        }
        if date_column == value_column {
            return Err(Error::InvalidSpec(format!(
                "schema columns must be distinct, both are '{date_column}'"
            )));
        }
        Ok(Self { date_column, value_column })
    }
}

impl Default for FeedSchema {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            value_column: "reward_rate".into(),
        }
    }
}

/// Reads a daily feed CSV into a [`RawSeries`].
///
/// Rows are sorted by date; interior gaps are left for [`repair_gaps`] to
/// handle. Dates must be `YYYY-MM-DD`, values finite decimals.
///
/// [`repair_gaps`]: crate::series::repair_gaps
pub fn read_feed(path: &Path, schema: &FeedSchema) -> Result<RawSeries> {
    let shown = path.display().to_string();
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| parse_error(&shown, 1, e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                path: shown.clone(),
                column: name.to_string(),
            })
    };
    let date_idx = col(&schema.date_column)?;
    let value_idx = col(&schema.value_column)?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(&shown, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize| {
            record
                .get(idx)
                .ok_or_else(|| parse_error(&shown, line, format!("row has no column {idx}")))
        };
        let date: NaiveDate = field(date_idx)?
            .trim()
            .parse()
            .map_err(|e| parse_error(&shown, line, format!("bad date: {e}")))?;
        let value: f64 = field(value_idx)?
            .trim()
            .parse()
            .map_err(|e| parse_error(&shown, line, format!("bad value: {e}")))?;
        if !value.is_finite() {
            return Err(parse_error(&shown, line, format!("non-finite value {value}")));
        }
        rows.push((date, value));
    }
    if rows.is_empty() {
        return Err(parse_error(&shown, 1, "feed contains no data rows".into()));
    }

    rows.sort_by_key(|&(date, _)| date);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate { path: shown, date: w[0].0 });
    }

    let (dates, values) = rows.into_iter().unzip();
    RawSeries::new(dates, values)
}

fn parse_error(path: &str, line: u64, message: String) -> Error {
    Error::Parse { path: path.to_string(), line, message }
}

/// Writes a series as a feed CSV in the format [`read_feed`] accepts.
///
/// Values use the shortest decimal form that round-trips, so a write/read
/// cycle reproduces the series exactly.
pub fn write_feed(path: &Path, series: &DailySeries, schema: &FeedSchema) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{},{}", schema.date_column, schema.value_column)?;
    for (date, value) in series.dates().zip(series.values()) {
        writeln!(out, "{date},{value}")?;
    }
    out.flush()?;
    Ok(())
}

/// Shape of a synthetic daily series.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthKind {
    /// Every value equals `level`.
    Constant { level: f64 },
    /// `level + slope * t` for day index t.
    LinearTrend { level: f64, slope: f64 },
    /// Mean-reverting AR(1): `x[0] = level`,
    /// `x[t] = level + phi * (x[t-1] - level) + e[t]`, `e ~ N(0, sigma^2)`.
    Ar1 { level: f64, phi: f64, sigma: f64 },
    /// `level + amplitude * sin(2*pi*t/period) + e[t]`.
    SineNoise {
        level: f64,
        amplitude: f64,
        period: f64,
        sigma: f64,
    },
    /// Constant `level` with one contiguous window scaled by `magnitude`.
    Burst {
        level: f64,
        magnitude: f64,
        start: usize,
        len: usize,
    },
}

/// Parameters of a deterministic synthetic series.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub length: usize,
    pub seed: u64,
    pub start_date: NaiveDate,
}

const DEFAULT_START: &str = "2021-06-23";

impl SynthSpec {
    /// Spec starting at the default date.
    pub fn new(kind: SynthKind, length: usize, seed: u64) -> Self {
        Self {
            kind,
            length,
            seed,
            start_date: DEFAULT_START.parse().expect("valid default date"),
        }
    }

    pub fn with_start_date(mut self, start_date: NaiveDate) -> Self {
        self.start_date = start_date;
        self
    }

    /// Checks the kind-specific invariants.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSpec(msg));
        if self.length == 0 {
            return invalid("length must be at least 1".into());
        }
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be finite, got {v}")))
            }
        };
        let noise = |sigma: f64| {
            finite("sigma", sigma)?;
            if sigma < 0.0 {
                return Err(Error::InvalidSpec(format!("sigma must be >= 0, got {sigma}")));
            }
            Ok(())
        };
        match self.kind {
            SynthKind::Constant { level } => finite("level", level),
            SynthKind::LinearTrend { level, slope } => {
                finite("level", level)?;
                finite("slope", slope)
            }
            SynthKind::Ar1 { level, phi, sigma } => {
                finite("level", level)?;
                finite("phi", phi)?;
                noise(sigma)?;
                if phi.abs() >= 1.0 {
                    return invalid(format!("ar1 requires |phi| < 1, got {phi}"));
                }
                Ok(())
            }
            SynthKind::SineNoise { level, amplitude, period, sigma } => {
                finite("level", level)?;
                finite("amplitude", amplitude)?;
                finite("period", period)?;
                noise(sigma)?;
                if period <= 0.0 {
                    return invalid(format!("period must be positive, got {period}"));
                }
                Ok(())
            }
            SynthKind::Burst { level, magnitude, start, len } => {
                finite("level", level)?;
                finite("magnitude", magnitude)?;
                if start.saturating_add(len) > self.length {
                    return invalid(format!(
                        "burst window {start}+{len} exceeds length {}",
                        self.length
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Generates a deterministic synthetic daily series.
///
/// Noise is drawn from a ChaCha8 stream seeded with `spec.seed`, so equal
/// specs produce bit-identical series.
pub fn generate(spec: &SynthSpec) -> Result<DailySeries> {
    spec.validate()?;
    let n = spec.length;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise = |sigma: f64| -> f64 {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("validated sigma").sample(&mut rng)
        } else {
            0.0
        }
    };

    let values: Vec<f64> = match spec.kind {
        SynthKind::Constant { level } => vec![level; n],
        SynthKind::LinearTrend { level, slope } => {
            (0..n).map(|t| level + slope * t as f64).collect()
        }
        SynthKind::Ar1 { level, phi, sigma } => {
            let mut values = Vec::with_capacity(n);
            let mut x = level;
            values.push(x);
            for _ in 1..n {
                x = level + phi * (x - level) + noise(sigma);
                values.push(x);
            }
            values
        }
        SynthKind::SineNoise { level, amplitude, period, sigma } => (0..n)
            .map(|t| {
                let angle = 2.0 * std::f64::consts::PI * t as f64 / period;
                level + amplitude * angle.sin() + noise(sigma)
            })
            .collect(),
        SynthKind::Burst { level, magnitude, start, len } => (0..n)
            .map(|t| {
                if t >= start && t < start + len {
                    level * magnitude
                } else {
                    level
                }
            })
            .collect(),
    };
    DailySeries::new(spec.start_date, values)
}
