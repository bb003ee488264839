//! Staking-reward time-series forecasting and walk-forward backtesting.
//!
//! The crate ingests daily CSV feeds (reward rate, price, search trends),
//! aligns them into feature frames, fits moving-window-average and lagged
//! least-squares forecasters for 1..n-day-ahead prediction, and evaluates
//! them by walk-forward backtesting with pooled RMSE/mean reporting.
//!
//! A typical pipeline:
//!
//! ```
//! use stakecast::{
//!     generate, horizon_sweep, FeatureFrame, Method, SweepConfig, SynthKind, SynthSpec,
//! };
//!
//! let rewards = generate(&SynthSpec::new(
//!     SynthKind::Ar1 { level: 0.05, phi: 0.9, sigma: 0.001 },
//!     240,
//!     7,
//! ))
//! .unwrap();
//! let frame = FeatureFrame::rewards_only(rewards);
//! let report = horizon_sweep(&frame, &SweepConfig::new(vec![Method::Mwa, Method::Slr], 7));
//! assert_eq!(report.cells.len(), 14);
//! ```

pub mod error;
pub mod eval;
pub mod forecast;
pub mod ingest;
pub mod series;

pub use error::{Error, Result};
pub use eval::{
    backtest, horizon_sweep, make_splits, rmse_over_mean, BacktestResult, CellFailure,
    EvalReport, Fold, FoldStats, SplitPlan, SweepConfig, TracePoint,
};
pub use forecast::{
    build_lag_matrix, fit_direct, mwa_predict, ols_fit, ols_predict, predict_at,
    FittedForecaster, ForecastSpec, HorizonStrategy, LagColumn, LagMatrix, Method, OlsModel,
};
pub use ingest::{generate, read_feed, write_feed, FeedSchema, SynthKind, SynthSpec};
pub use series::{align, repair_gaps, DailySeries, FeatureFrame, FeatureKind, RawSeries};
