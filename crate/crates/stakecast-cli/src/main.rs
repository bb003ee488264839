//! Command-line staking-reward forecasting toolkit.
//!
//! Commands:
//! - `backtest` — walk-forward evaluation of one or more methods at a single
//!   horizon, with report tables and prediction traces.
//! - `sweep` — the same evaluation over horizons 1..N, one table row per N.
//! - `forecast` — fit on the trailing training window and print upcoming
//!   predictions.
//! - `synth` — generate a deterministic synthetic feed CSV.
//!
//! Results go to stdout and the output directory; diagnostics go to stderr
//! as a single line naming the failing stage.

mod pipeline;
mod report;
mod svg;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{Days, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stakecast::{
    backtest, fit_direct, generate, horizon_sweep, make_splits, write_feed, Error, EvalReport,
    FeedSchema, ForecastSpec, Method, SweepConfig, SynthKind, SynthSpec,
};

use pipeline::{CliError, Stage};
use svg::ChartSeries;

#[derive(Parser)]
#[command(
    name = "stakecast",
    about = "Staking-reward forecasting and walk-forward backtesting",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Backtest the chosen methods at one horizon and write report tables.
    Backtest(RunConfig),
    /// Backtest every horizon 1..N per method and write the sweep table.
    Sweep {
        #[command(flatten)]
        config: RunConfig,
        /// Largest horizon N of the sweep.
        #[arg(long, default_value_t = 7)]
        horizons: usize,
    },
    /// Fit on the trailing training window and print one prediction per
    /// horizon 1..n (uses the first --method entry).
    Forecast(RunConfig),
    /// Generate a synthetic daily feed CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
    Svg,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    s.parse().map_err(|e| format!("bad date '{s}': {e}"))
}

/// Shared options of the feed-consuming commands.
#[derive(Args)]
struct RunConfig {
    /// Rewards feed CSV.
    #[arg(long)]
    rewards: PathBuf,

    /// Price feed CSV.
    #[arg(long)]
    price: Option<PathBuf>,

    /// Search-trends feed CSV.
    #[arg(long)]
    trends: Option<PathBuf>,

    /// Methods to evaluate, comma separated (mwa, slr, mlr).
    #[arg(long = "method", value_delimiter = ',', default_value = "mwa,slr", value_parser = parse_method)]
    methods: Vec<Method>,

    /// Moving-average window W in days.
    #[arg(long, default_value_t = 7)]
    window: usize,

    /// Lags L per feature for the regression methods.
    #[arg(long, default_value_t = 7)]
    lags: usize,

    /// Forecast horizon n in days.
    #[arg(long, default_value_t = 1)]
    horizon: usize,

    /// Training window length in days.
    #[arg(long = "train", default_value_t = 90)]
    train_len: usize,

    /// Test window length in days.
    #[arg(long = "test", default_value_t = 30)]
    test_len: usize,

    /// Fold stride in days (defaults to the test length).
    #[arg(long)]
    stride: Option<usize>,

    /// Largest interior feed gap repaired by forward fill, in days.
    #[arg(long, default_value_t = 3)]
    max_gap: u32,

    /// Date column name in the feed CSVs.
    #[arg(long, default_value = "date")]
    date_column: String,

    /// Value column name (defaults to the single non-date column per file).
    #[arg(long)]
    value_column: Option<String>,

    /// Asset label used in report headings (defaults to the rewards file stem).
    #[arg(long)]
    label: Option<String>,

    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Report formats to write.
    #[arg(long, value_delimiter = ',', default_value = "md,csv", value_enum)]
    format: Vec<Format>,
}

impl RunConfig {
    fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            self.rewards
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "asset".to_string())
        })
    }

    fn stride(&self) -> usize {
        self.stride.unwrap_or(self.test_len)
    }

    fn forecast_spec(&self, method: Method, horizon: usize) -> ForecastSpec {
        ForecastSpec::new(method)
            .with_window(self.window)
            .with_lags(self.lags)
            .with_horizon(horizon)
    }

    fn sweep_config(&self, horizons: Vec<usize>) -> SweepConfig {
        SweepConfig {
            methods: self.methods.clone(),
            horizons,
            window: self.window,
            lags: self.lags,
            train_len: self.train_len,
            test_len: self.test_len,
            stride: self.stride(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Constant,
    LinearTrend,
    Ar1,
    SineNoise,
    Burst,
}

#[derive(Args)]
struct SynthArgs {
    /// Shape of the generated series.
    #[arg(long, value_enum)]
    kind: KindArg,

    /// Series length in days.
    #[arg(long, default_value_t = 240)]
    length: usize,

    /// Seed of the noise stream.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Base level of the series.
    #[arg(long, default_value_t = 0.05)]
    level: f64,

    /// Daily slope (linear-trend).
    #[arg(long, default_value_t = 0.0002)]
    slope: f64,

    /// Autoregressive coefficient, |phi| < 1 (ar1).
    #[arg(long, default_value_t = 0.9)]
    phi: f64,

    /// Noise standard deviation (ar1, sine-noise).
    #[arg(long, default_value_t = 0.002)]
    sigma: f64,

    /// Sine amplitude (sine-noise).
    #[arg(long, default_value_t = 0.01)]
    amplitude: f64,

    /// Sine period in days (sine-noise).
    #[arg(long, default_value_t = 30.0)]
    period: f64,

    /// Scale applied inside the burst window (burst).
    #[arg(long, default_value_t = 3.0)]
    magnitude: f64,

    /// First day of the burst window (defaults to the middle).
    #[arg(long)]
    burst_start: Option<usize>,

    /// Burst window length (defaults to a tenth of the series).
    #[arg(long)]
    burst_len: Option<usize>,

    /// First date of the series.
    #[arg(long, default_value = "2021-06-23", value_parser = parse_date)]
    start: NaiveDate,

    /// Date column name of the written CSV.
    #[arg(long, default_value = "date")]
    date_column: String,

    /// Value column name of the written CSV.
    #[arg(long, default_value = "reward_rate")]
    value_column: String,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

impl SynthArgs {
    fn kind(&self) -> SynthKind {
        match self.kind {
            KindArg::Constant => SynthKind::Constant { level: self.level },
            KindArg::LinearTrend => SynthKind::LinearTrend {
                level: self.level,
                slope: self.slope,
            },
            KindArg::Ar1 => SynthKind::Ar1 {
                level: self.level,
                phi: self.phi,
                sigma: self.sigma,
            },
            KindArg::SineNoise => SynthKind::SineNoise {
                level: self.level,
                amplitude: self.amplitude,
                period: self.period,
                sigma: self.sigma,
            },
            KindArg::Burst => SynthKind::Burst {
                level: self.level,
                magnitude: self.magnitude,
                start: self.burst_start.unwrap_or(self.length / 2),
                len: self.burst_len.unwrap_or((self.length / 10).max(1)),
            },
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Backtest(config) => run_backtest(config),
        Command::Sweep { config, horizons } => run_sweep(config, horizons),
        Command::Forecast(config) => run_forecast(config),
        Command::Synth(args) => run_synth(args),
    }
}

fn run_backtest(config: RunConfig) -> Result<(), CliError> {
    let frame = pipeline::load_frame(&config)?;
    let plan = make_splits(frame.len(), config.train_len, config.test_len, config.stride())
        .map_err(|e| CliError::new(Stage::Eval, e))?;
    let mut cells = Vec::new();
    for &method in &config.methods {
        let spec = config.forecast_spec(method, config.horizon);
        let cell = backtest(&frame, &spec, &plan)
            .map_err(|e| CliError::new(pipeline::fit_or_eval_stage(&e), e))?;
        cells.push(cell);
    }
    let report = EvalReport {
        methods: config.methods.clone(),
        horizons: vec![config.horizon],
        cells,
        failures: Vec::new(),
    };
    let md = report::render_backtest_md(&config.label(), &report);
    print!("{md}");
    write_outputs(&config, &report, &md)
}

fn run_sweep(config: RunConfig, max_horizon: usize) -> Result<(), CliError> {
    if max_horizon == 0 {
        return Err(CliError::new(Stage::Eval, "horizons must be at least 1"));
    }
    let frame = pipeline::load_frame(&config)?;
    let sweep = config.sweep_config((1..=max_horizon).collect());
    let report = horizon_sweep(&frame, &sweep);
    let md = report::render_sweep_md(&config.label(), &report);
    print!("{md}");
    write_outputs(&config, &report, &md)
}

fn run_forecast(config: RunConfig) -> Result<(), CliError> {
    let frame = pipeline::load_frame(&config)?;
    if frame.len() < config.train_len {
        let err = Error::InsufficientHistory {
            needed: config.train_len,
            available: frame.len(),
        };
        return Err(CliError::new(Stage::Fit, err));
    }
    let tail = frame.slice(frame.len() - config.train_len..frame.len());
    let method = config.methods.first().copied().expect("clap default");
    let origin = tail.len() - 1;
    for horizon in 1..=config.horizon {
        let spec = config.forecast_spec(method, horizon);
        let forecaster = fit_direct(&tail, &spec).map_err(|e| CliError::new(Stage::Fit, e))?;
        let value = forecaster
            .predict_at(&tail, origin)
            .map_err(|e| CliError::new(Stage::Fit, e))?;
        let date = tail.end_date() + Days::new(horizon as u64);
        println!("{date},{value}");
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), CliError> {
    let synth = |e: Error| CliError::new(Stage::Synth, e);
    let spec = SynthSpec::new(args.kind(), args.length, args.seed).with_start_date(args.start);
    let series = generate(&spec).map_err(synth)?;
    let schema = FeedSchema::new(&args.date_column, &args.value_column).map_err(synth)?;
    write_feed(&args.out, &series, &schema).map_err(synth)?;
    Ok(())
}

fn write_outputs(config: &RunConfig, report: &EvalReport, md: &str) -> Result<(), CliError> {
    fs::create_dir_all(&config.out)
        .map_err(|e| CliError::new(Stage::Report, format!("{}: {e}", config.out.display())))?;
    if config.format.contains(&Format::Md) {
        report::write_file(&config.out.join("report.md"), md)?;
    }
    if config.format.contains(&Format::Csv) {
        report::write_file(&config.out.join("report.csv"), &report::render_csv(report))?;
    }
    report::write_traces(&config.out, report)?;
    if config.format.contains(&Format::Svg) {
        write_charts(config, report)?;
    }
    Ok(())
}

/// One chart per horizon: the actual series plus each evaluated method.
fn write_charts(config: &RunConfig, report: &EvalReport) -> Result<(), CliError> {
    for &horizon in &report.horizons {
        let cells: Vec<_> = report
            .methods
            .iter()
            .filter_map(|&m| report.cell(m, horizon))
            .collect();
        let Some(first) = cells.first() else {
            continue;
        };
        let dates: Vec<NaiveDate> = first.trace.iter().map(|p| p.date).collect();
        let mut series = vec![ChartSeries {
            name: "actual".to_string(),
            values: first.trace.iter().map(|p| p.actual).collect(),
        }];
        for cell in &cells {
            series.push(ChartSeries {
                name: cell.method.label().to_string(),
                values: cell.trace.iter().map(|p| p.predicted).collect(),
            });
        }
        let title = format!("{} — {horizon}-day-ahead predictions", config.label());
        let chart = svg::render_chart(&title, &dates, &series)?;
        report::write_file(&config.out.join(format!("chart_{horizon}.svg")), &chart)?;
    }
    Ok(())
}
