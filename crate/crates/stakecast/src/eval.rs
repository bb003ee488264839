//! Walk-forward backtesting, the pooled RMSE/mean metric, and the horizon
//! sweep that produces the per-method, per-horizon error matrix.
//!
//! Evaluation follows a rolling 90/30 layout by default: each fold trains on
//! `train_len` consecutive days and tests on the following `test_len` days,
//! advancing by `stride` (the test length, for contiguous non-overlapping
//! test blocks). Inside a fold the model is fitted on the training range
//! only; prediction origins then walk through the test range, with the
//! earliest origins drawing their lag windows from the tail of the training
//! range so that every test day receives a prediction.

use std::ops::Range;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::forecast::{fit_direct, ForecastSpec, Method};
use crate::series::FeatureFrame;

/// Train/test index ranges of one walk-forward fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// The full walk-forward split layout for a series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train_len: usize,
    pub test_len: usize,
    pub stride: usize,
    pub folds: Vec<Fold>,
}

/// Enumerates every train+test window fully inside a series of
/// `series_len` days: fold k trains on `[k*stride, k*stride + train_len)`
/// and tests on the following `test_len` days.
pub fn make_splits(
    series_len: usize,
    train_len: usize,
    test_len: usize,
    stride: usize,
) -> Result<SplitPlan> {
    if train_len == 0 || test_len == 0 || stride == 0 {
        return Err(Error::InvalidSpec(
            "train_len, test_len, and stride must be at least 1".into(),
        ));
    }
    let fold_len = train_len + test_len;
    if series_len < fold_len {
        return Err(Error::NoFolds {
            len: series_len,
            train: train_len,
            test: test_len,
        });
    }
    let folds = (0..)
        .map(|k| k * stride)
        .take_while(|start| start + fold_len <= series_len)
        .map(|start| Fold {
            train: start..start + train_len,
            test: start + train_len..start + fold_len,
        })
        .collect();
    Ok(SplitPlan {
        train_len,
        test_len,
        stride,
        folds,
    })
}

/// Root-mean-square error of the predictions divided by the mean of the
/// actual values.
pub fn rmse_over_mean(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    let mse = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / n;
    Ok(mse.sqrt() / mean)
}

/// One evaluated test point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Date of the target (origin + horizon).
    pub date: NaiveDate,
    pub actual: f64,
    pub predicted: f64,
}

/// Per-fold error breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldStats {
    pub fold: usize,
    pub rmse: f64,
    pub mean_actual: f64,
    pub count: usize,
}

/// Backtest outcome for one (method, horizon) cell.
#[derive(Debug, Clone)]
pub struct BacktestResult {
    pub method: Method,
    pub horizon: usize,
    /// Pooled RMSE over all test points divided by the mean of the pooled
    /// actual test values.
    pub rmse_over_mean: f64,
    pub pooled_rmse: f64,
    /// Mean of the pooled actual test values — the metric denominator.
    pub pooled_mean_actual: f64,
    /// Mean of the whole rewards series, recorded so the alternate
    /// denominator convention can also be read off the report.
    pub series_mean: f64,
    pub folds: Vec<FoldStats>,
    /// One point per test day, in date order across folds.
    pub trace: Vec<TracePoint>,
}

impl BacktestResult {
    pub fn n_points(&self) -> usize {
        self.trace.len()
    }
}

/// Walk-forward backtest of one forecaster over the plan's folds.
///
/// Each fold fits on its training range only and predicts every day of its
/// test range; a prediction at origin `t` reads frame data at indices
/// `<= t` and is scored against the actual rewards at `t + horizon`.
pub fn backtest(
    frame: &FeatureFrame,
    spec: &ForecastSpec,
    plan: &SplitPlan,
) -> Result<BacktestResult> {
    spec.validate()?;
    if plan.folds.is_empty() {
        return Err(Error::NoFolds {
            len: frame.len(),
            train: plan.train_len,
            test: plan.test_len,
        });
    }
    let last_end = plan.folds.iter().map(|f| f.test.end).max().unwrap_or(0);
    if last_end > frame.len() {
        return Err(Error::LengthMismatch {
            left: last_end,
            right: frame.len(),
        });
    }
    // Keep the earliest origin's history window inside the fold.
    let needed_train = match spec.method {
        Method::Mwa => spec.window + spec.horizon - 1,
        Method::Slr | Method::Mlr => spec.lags + spec.horizon,
    };
    if plan.train_len < needed_train {
        return Err(Error::InsufficientHistory {
            needed: needed_train,
            available: plan.train_len,
        });
    }

    let rewards = frame.rewards().values();
    let n = spec.horizon;
    let mut trace = Vec::new();
    let mut folds = Vec::with_capacity(plan.folds.len());

    for (fold_id, fold) in plan.folds.iter().enumerate() {
        let forecaster = fit_direct(&frame.slice(fold.train.clone()), spec)?;
        let mut sq_sum = 0.0;
        let mut actual_sum = 0.0;
        for target in fold.test.clone() {
            let origin = target - n;
            let predicted = forecaster.predict_at(frame, origin)?;
            let actual = rewards[target];
            sq_sum += (actual - predicted) * (actual - predicted);
            actual_sum += actual;
            trace.push(TracePoint {
                date: frame.date_at(target),
                actual,
                predicted,
            });
        }
        let count = fold.test.len();
        folds.push(FoldStats {
            fold: fold_id,
            rmse: (sq_sum / count as f64).sqrt(),
            mean_actual: actual_sum / count as f64,
            count,
        });
    }

    let actuals: Vec<f64> = trace.iter().map(|p| p.actual).collect();
    let predictions: Vec<f64> = trace.iter().map(|p| p.predicted).collect();
    let ratio = rmse_over_mean(&actuals, &predictions)?;
    let pooled_n = actuals.len() as f64;
    let pooled_mean_actual = actuals.iter().sum::<f64>() / pooled_n;
    let pooled_rmse = ratio * pooled_mean_actual;
    let series_mean = rewards.iter().sum::<f64>() / rewards.len() as f64;

    Ok(BacktestResult {
        method: spec.method,
        horizon: spec.horizon,
        rmse_over_mean: ratio,
        pooled_rmse,
        pooled_mean_actual,
        series_mean,
        folds,
        trace,
    })
}

/// Settings for a horizon sweep: which methods and horizons to evaluate and
/// the shared hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub horizons: Vec<usize>,
    pub window: usize,
    pub lags: usize,
    pub train_len: usize,
    pub test_len: usize,
    pub stride: usize,
}

impl SweepConfig {
    pub const DEFAULT_TRAIN_LEN: usize = 90;
    pub const DEFAULT_TEST_LEN: usize = 30;

    /// Sweep over horizons `1..=max_horizon` with the default 90/30 layout.
    pub fn new(methods: Vec<Method>, max_horizon: usize) -> Self {
        Self {
            methods,
            horizons: (1..=max_horizon).collect(),
            window: ForecastSpec::DEFAULT_WINDOW,
            lags: ForecastSpec::DEFAULT_LAGS,
            train_len: Self::DEFAULT_TRAIN_LEN,
            test_len: Self::DEFAULT_TEST_LEN,
            stride: Self::DEFAULT_TEST_LEN,
        }
    }

    /// The forecast spec for one (method, horizon) cell.
    pub fn spec_for(&self, method: Method, horizon: usize) -> ForecastSpec {
        ForecastSpec::new(method)
            .with_window(self.window)
            .with_lags(self.lags)
            .with_horizon(horizon)
    }
}

/// A sweep cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellFailure {
    pub method: Method,
    pub horizon: usize,
    pub message: String,
}

/// The per-method, per-horizon error matrix of a sweep. Failed cells are
/// recorded with their error instead of aborting the sweep.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub methods: Vec<Method>,
    pub horizons: Vec<usize>,
    pub cells: Vec<BacktestResult>,
    pub failures: Vec<CellFailure>,
}

impl EvalReport {
    pub fn cell(&self, method: Method, horizon: usize) -> Option<&BacktestResult> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.horizon == horizon)
    }

    pub fn failure(&self, method: Method, horizon: usize) -> Option<&CellFailure> {
        self.failures
            .iter()
            .find(|f| f.method == method && f.horizon == horizon)
    }

    /// Smallest rmse/mean among the methods evaluated at this horizon.
    pub fn row_min(&self, horizon: usize) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.horizon == horizon)
            .map(|c| c.rmse_over_mean)
            .min_by(|a, b| a.partial_cmp(b).expect("metric is finite"))
    }

    /// Whether this cell attains the row minimum (ties all flagged), the
    /// per-row bolding of the sweep table.
    pub fn is_row_min(&self, method: Method, horizon: usize) -> bool {
        match (self.cell(method, horizon), self.row_min(horizon)) {
            (Some(cell), Some(min)) => cell.rmse_over_mean == min,
            _ => false,
        }
    }
}

/// Backtests every (method, horizon) cell of the config. Per-cell failures
/// (including a series too short for any fold) are recorded in the report
/// rather than aborting the sweep.
pub fn horizon_sweep(frame: &FeatureFrame, config: &SweepConfig) -> EvalReport {
    let mut report = EvalReport {
        methods: config.methods.clone(),
        horizons: config.horizons.clone(),
        cells: Vec::new(),
        failures: Vec::new(),
    };
    let plan = make_splits(frame.len(), config.train_len, config.test_len, config.stride);
    for &method in &config.methods {
        for &horizon in &config.horizons {
            let outcome = plan
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|plan| {
                    backtest(frame, &config.spec_for(method, horizon), plan)
                        .map_err(|e| e.to_string())
                });
            match outcome {
                Ok(cell) => report.cells.push(cell),
                Err(message) => report.failures.push(CellFailure {
                    method,
                    horizon,
                    message,
                }),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::ingest::{generate, SynthKind, SynthSpec};
    use crate::series::{DailySeries, FeatureFrame};

    fn frame_of(values: Vec<f64>) -> FeatureFrame {
        let series = DailySeries::new("2024-01-01".parse().unwrap(), values).unwrap();
        FeatureFrame::rewards_only(series)
    }

    fn constant_frame(len: usize, level: f64) -> FeatureFrame {
        frame_of(vec![level; len])
    }

    #[test]
    fn splits_roll_by_stride() {
        let plan = make_splits(150, 90, 30, 30).unwrap();
        assert_eq!(plan.folds.len(), 2);
        assert_eq!(plan.folds[0], Fold { train: 0..90, test: 90..120 });
        assert_eq!(plan.folds[1], Fold { train: 30..120, test: 120..150 });
    }

    #[test]
    fn exact_fit_series_yields_single_fold() {
        let plan = make_splits(120, 90, 30, 30).unwrap();
        assert_eq!(plan.folds, vec![Fold { train: 0..90, test: 90..120 }]);
    }

    #[test]
    fn one_day_short_yields_no_folds() {
        let err = make_splits(119, 90, 30, 30).unwrap_err();
        assert!(matches!(err, Error::NoFolds { len: 119, train: 90, test: 30 }));
    }

    #[test]
    fn rmse_over_mean_by_definition() {
        assert_eq!(rmse_over_mean(&[2.0, 2.0], &[1.0, 3.0]).unwrap(), 0.5);
        assert_eq!(rmse_over_mean(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(rmse_over_mean(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn rmse_over_mean_rejects_bad_inputs() {
        assert!(matches!(
            rmse_over_mean(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(matches!(rmse_over_mean(&[], &[]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            rmse_over_mean(&[1.0, -1.0], &[0.0, 0.0]),
            Err(Error::ZeroMean)
        ));
    }

    #[test]
    fn constant_frame_backtests_to_zero_error() {
        let frame = constant_frame(150, 0.05);
        let plan = make_splits(frame.len(), 90, 30, 30).unwrap();
        for method in [Method::Mwa, Method::Slr] {
            let result = backtest(&frame, &ForecastSpec::new(method), &plan).unwrap();
            assert!(
                result.rmse_over_mean < 1e-9,
                "{method}: {}",
                result.rmse_over_mean
            );
            assert_eq!(result.n_points(), 60);
        }
    }

    #[test]
    fn trace_covers_every_test_day_in_order() {
        let frame = constant_frame(150, 0.05);
        let plan = make_splits(frame.len(), 90, 30, 30).unwrap();
        let result = backtest(&frame, &ForecastSpec::new(Method::Mwa), &plan).unwrap();
        let expected: Vec<_> = (90..150).map(|i| frame.date_at(i)).collect();
        let got: Vec<_> = result.trace.iter().map(|p| p.date).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn noiseless_trend_is_continued_by_slr() {
        let values: Vec<f64> = (0..150).map(|t| 1.0 + 0.01 * t as f64).collect();
        let frame = frame_of(values);
        let plan = make_splits(frame.len(), 90, 30, 30).unwrap();
        for horizon in 1..=7 {
            let spec = ForecastSpec::new(Method::Slr).with_horizon(horizon);
            let result = backtest(&frame, &spec, &plan).unwrap();
            assert!(
                result.rmse_over_mean < 1e-6,
                "n={horizon}: {}",
                result.rmse_over_mean
            );
        }
    }

    #[test]
    fn mwa_lags_a_trend_with_error_growing_in_horizon() {
        let values: Vec<f64> = (0..150).map(|t| 1.0 + 0.01 * t as f64).collect();
        let frame = frame_of(values);
        let plan = make_splits(frame.len(), 90, 30, 30).unwrap();
        let mut last = 0.0;
        for horizon in 1..=7 {
            let spec = ForecastSpec::new(Method::Mwa).with_horizon(horizon);
            let result = backtest(&frame, &spec, &plan).unwrap();
            assert!(result.rmse_over_mean > 0.0);
            assert!(result.rmse_over_mean > last, "n={horizon} did not grow");
            last = result.rmse_over_mean;
        }
        // A W-day mean of a linear trend sits (W+1)/2 - 1 + n days behind the
        // target, so the pooled RMSE is slope * (n + (W-1)/2) exactly.
        let spec = ForecastSpec::new(Method::Mwa).with_horizon(1);
        let result = backtest(&frame, &spec, &plan).unwrap();
        assert_relative_eq!(result.pooled_rmse, 0.01 * 4.0, max_relative = 1e-9);
    }

    #[test]
    fn pooling_is_consistent_across_folds() {
        let spec = SynthSpec::new(SynthKind::Ar1 { level: 1.0, phi: 0.8, sigma: 0.05 }, 240, 5);
        let frame = FeatureFrame::rewards_only(generate(&spec).unwrap());
        let plan = make_splits(frame.len(), 90, 30, 30).unwrap();
        let result = backtest(&frame, &ForecastSpec::new(Method::Mwa), &plan).unwrap();
        let pooled_count: usize = result.folds.iter().map(|f| f.count).sum();
        assert_eq!(pooled_count, result.n_points());
        let fold_sq: f64 = result
            .folds
            .iter()
            .map(|f| f.rmse * f.rmse * f.count as f64)
            .sum();
        assert_relative_eq!(
            result.pooled_rmse * result.pooled_rmse * pooled_count as f64,
            fold_sq,
            max_relative = 1e-9
        );
    }

    #[test]
    fn scale_invariance_of_the_metric() {
        let spec = SynthSpec::new(SynthKind::Ar1 { level: 0.05, phi: 0.9, sigma: 0.002 }, 200, 9);
        let base = generate(&spec).unwrap();
        let plan = make_splits(base.len(), 90, 30, 30).unwrap();
        let reference = backtest(
            &FeatureFrame::rewards_only(base.clone()),
            &ForecastSpec::new(Method::Slr),
            &plan,
        )
        .unwrap()
        .rmse_over_mean;
        for factor in [0.01, 100.0] {
            let scaled: Vec<f64> = base.values().iter().map(|v| v * factor).collect();
            let frame =
                FeatureFrame::rewards_only(DailySeries::new(base.start_date(), scaled).unwrap());
            let result = backtest(&frame, &ForecastSpec::new(Method::Slr), &plan).unwrap();
            assert_relative_eq!(result.rmse_over_mean, reference, max_relative = 1e-9);
        }
    }

    #[test]
    fn no_leakage_after_test_range() {
        let spec = SynthSpec::new(SynthKind::Ar1 { level: 1.0, phi: 0.9, sigma: 0.03 }, 180, 21);
        let base = generate(&spec).unwrap();
        let plan = make_splits(base.len(), 90, 30, 30).unwrap();
        let full = backtest(
            &FeatureFrame::rewards_only(base.clone()),
            &ForecastSpec::new(Method::Slr),
            &plan,
        )
        .unwrap();
        // Corrupt everything after fold 0's test range and recompute fold 0.
        let cut = plan.folds[0].test.end;
        let mut values = base.values().to_vec();
        for v in values.iter_mut().skip(cut) {
            *v = 123.456;
        }
        let corrupted =
            FeatureFrame::rewards_only(DailySeries::new(base.start_date(), values).unwrap());
        let redone = backtest(&corrupted, &ForecastSpec::new(Method::Slr), &plan).unwrap();
        assert_eq!(full.folds[0], redone.folds[0]);
        for (a, b) in full.trace[..30].iter().zip(&redone.trace[..30]) {
            assert_eq!(a.predicted.to_bits(), b.predicted.to_bits());
        }
    }

    #[test]
    fn backtest_is_deterministic() {
        let spec = SynthSpec::new(SynthKind::SineNoise { level: 1.0, amplitude: 0.1, period: 30.0, sigma: 0.02 }, 200, 3);
        let frame = FeatureFrame::rewards_only(generate(&spec).unwrap());
        let plan = make_splits(frame.len(), 90, 30, 30).unwrap();
        let a = backtest(&frame, &ForecastSpec::new(Method::Slr), &plan).unwrap();
        let b = backtest(&frame, &ForecastSpec::new(Method::Slr), &plan).unwrap();
        assert_eq!(a.rmse_over_mean.to_bits(), b.rmse_over_mean.to_bits());
        assert_eq!(a.trace.len(), b.trace.len());
        for (x, y) in a.trace.iter().zip(&b.trace) {
            assert_eq!(x.predicted.to_bits(), y.predicted.to_bits());
        }
    }

    #[test]
    fn sweep_records_failures_without_aborting() {
        // 119 days: no fold fits, every cell fails with the NoFolds message.
        let frame = constant_frame(119, 0.05);
        let report = horizon_sweep(&frame, &SweepConfig::new(vec![Method::Mwa, Method::Slr], 7));
        assert!(report.cells.is_empty());
        assert_eq!(report.failures.len(), 14);
        assert!(report.failure(Method::Mwa, 1).unwrap().message.contains("shorter"));
    }

    #[test]
    fn sweep_on_constant_frame_is_all_zero() {
        let frame = constant_frame(150, 0.05);
        let report = horizon_sweep(&frame, &SweepConfig::new(vec![Method::Mwa, Method::Slr], 7));
        assert_eq!(report.cells.len(), 14);
        for cell in &report.cells {
            assert!(
                cell.rmse_over_mean < 1e-9,
                "{} n={}: {}",
                cell.method,
                cell.horizon,
                cell.rmse_over_mean
            );
        }
        for horizon in 1..=7 {
            assert!(report.row_min(horizon).unwrap() < 1e-9);
            let flagged = report
                .cells
                .iter()
                .filter(|c| c.horizon == horizon)
                .filter(|c| report.is_row_min(c.method, horizon))
                .count();
            assert!(flagged >= 1);
        }
    }

    #[test]
    fn mixed_sweep_flags_row_minima() {
        let values: Vec<f64> = (0..150).map(|t| 1.0 + 0.01 * t as f64).collect();
        let frame = frame_of(values);
        let report = horizon_sweep(&frame, &SweepConfig::new(vec![Method::Mwa, Method::Slr], 3));
        // SLR nails the noiseless trend; MWA lags it.
        for horizon in 1..=3 {
            assert!(report.is_row_min(Method::Slr, horizon));
            assert!(!report.is_row_min(Method::Mwa, horizon));
        }
    }
}
