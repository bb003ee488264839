//! Forecasting methods: moving-window average and lagged least-squares
//! regression, with direct multi-horizon prediction.
//!
//! Three methods are supported:
//! - [`Method::Mwa`] — the mean of the trailing `window` rewards values; the
//!   same level forecast is issued for every horizon.
//! - [`Method::Slr`] — least squares on `lags` lagged rewards values.
//! - [`Method::Mlr`] — least squares on `lags` lagged values of rewards,
//!   price, and search trends.
//!
//! Multi-step forecasts use the direct strategy: one independent model is
//! fitted per horizon, never a recursive feedback of one-step predictions.

mod lag;
mod ols;

use std::fmt;
use std::str::FromStr;

pub use lag::{build_lag_matrix, LagColumn, LagMatrix};
pub use ols::{ols_fit, ols_predict, OlsModel};

use crate::error::{Error, Result};
use crate::series::{FeatureFrame, FeatureKind};

/// Forecasting method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Moving-window average.
    Mwa,
    /// Single linear regression (rewards only).
    Slr,
    /// Multiple linear regression (rewards, price, trends).
    Mlr,
}

impl Method {
    /// The feature set the method regresses on (rewards alone for MWA, which
    /// does not regress but still reads the rewards series).
    pub fn features(self) -> &'static [FeatureKind] {
        match self {
            Method::Mwa | Method::Slr => &[FeatureKind::Rewards],
            Method::Mlr => &FeatureKind::ALL,
        }
    }

    /// Lowercase name, used in file names and flags.
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mwa => "mwa",
            Method::Slr => "slr",
            Method::Mlr => "mlr",
        }
    }

    /// Uppercase label, used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Mwa => "MWA",
            Method::Slr => "SLR",
            Method::Mlr => "MLR",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mwa" => Ok(Method::Mwa),
            "slr" => Ok(Method::Slr),
            "mlr" => Ok(Method::Mlr),
            other => Err(format!("unknown method '{other}' (expected mwa, slr, or mlr)")),
        }
    }
}

/// Multi-step forecasting strategy. Only the direct strategy (one
/// independently fitted model per horizon) is implemented; the enum leaves
/// room for a recursive variant.
#[non_exhaustive]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HorizonStrategy {
    #[default]
    Direct,
}

/// Method choice plus all hyperparameters for one forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSpec {
    pub method: Method,
    /// Trailing window W for the moving average.
    pub window: usize,
    /// Lag count L per feature for the regressions.
    pub lags: usize,
    /// Days ahead n being predicted.
    pub horizon: usize,
    /// Z-score features with training statistics before fitting. Defaults on
    /// for MLR (mixed units) and off for the single-unit methods.
    pub normalize: bool,
    /// Ridge stabilizer applied to the standardized coefficients.
    pub ridge_eps: f64,
    pub strategy: HorizonStrategy,
}

impl ForecastSpec {
    pub const DEFAULT_WINDOW: usize = 7;
    pub const DEFAULT_LAGS: usize = 7;
    pub const DEFAULT_RIDGE_EPS: f64 = 1e-8;

    /// Defaults for `method`: W = L = 7, horizon 1.
    pub fn new(method: Method) -> Self {
        Self {
            method,
            window: Self::DEFAULT_WINDOW,
            lags: Self::DEFAULT_LAGS,
            horizon: 1,
            normalize: method == Method::Mlr,
            ridge_eps: Self::DEFAULT_RIDGE_EPS,
            strategy: HorizonStrategy::Direct,
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_lags(mut self, lags: usize) -> Self {
        self.lags = lags;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSpec(msg));
        if self.window == 0 {
            return invalid("window must be at least 1".into());
        }
        if self.lags == 0 {
            return invalid("lags must be at least 1".into());
        }
        if self.horizon == 0 {
            return invalid("horizon must be at least 1".into());
        }
        if !(self.ridge_eps >= 0.0 && self.ridge_eps.is_finite()) {
            return invalid(format!("ridge_eps must be finite and >= 0, got {}", self.ridge_eps));
        }
        Ok(())
    }

    /// History a prediction origin must have at or before it.
    fn history_needed(&self) -> usize {
        match self.method {
            Method::Mwa => self.window,
            Method::Slr | Method::Mlr => self.lags,
        }
    }
}

/// Predicts the next value as the arithmetic mean of the trailing `window`
/// observations. The `horizon` only undergoes validation: the same level
/// forecast is issued no matter how far ahead the target lies.
pub fn mwa_predict(history: &[f64], window: usize, horizon: usize) -> Result<f64> {
    if window == 0 || horizon == 0 {
        return Err(Error::InvalidSpec("window and horizon must be at least 1".into()));
    }
    if history.len() < window {
        return Err(Error::InsufficientHistory {
            needed: window,
            available: history.len(),
        });
    }
    let tail = &history[history.len() - window..];
    Ok(tail.iter().sum::<f64>() / window as f64)
}

#[derive(Debug, Clone)]
enum ForecasterKind {
    WindowAverage,
    Regression(OlsModel),
}

/// A forecaster fitted for one (method, horizon) pair.
///
/// Immutable once fitted; predictions read frame values at indices at or
/// before the requested origin only.
#[derive(Debug, Clone)]
pub struct FittedForecaster {
    spec: ForecastSpec,
    kind: ForecasterKind,
}

impl FittedForecaster {
    pub fn spec(&self) -> &ForecastSpec {
        &self.spec
    }

    /// The underlying regression model, when the method has one.
    pub fn model(&self) -> Option<&OlsModel> {
        match &self.kind {
            ForecasterKind::WindowAverage => None,
            ForecasterKind::Regression(model) => Some(model),
        }
    }

    /// Predicts the rewards value `horizon` days after the origin index,
    /// using only frame data at indices `<= origin`.
    pub fn predict_at(&self, frame: &FeatureFrame, origin: usize) -> Result<f64> {
        let needed = self.spec.history_needed();
        if origin >= frame.len() || origin + 1 < needed {
            return Err(Error::InsufficientHistory {
                needed,
                available: (origin + 1).min(frame.len()),
            });
        }
        match &self.kind {
            ForecasterKind::WindowAverage => {
                let history = &frame.rewards().values()[..=origin];
                mwa_predict(history, self.spec.window, self.spec.horizon)
            }
            ForecasterKind::Regression(model) => {
                let features =
                    lag::feature_vector_at(frame, model.layout(), model.lags(), origin)?;
                ols_predict(model, &features)
            }
        }
    }
}

/// Fits a forecaster for `spec` on the frame, using the direct strategy:
/// the regression target is the rewards value `spec.horizon` days ahead.
pub fn fit_direct(frame: &FeatureFrame, spec: &ForecastSpec) -> Result<FittedForecaster> {
    spec.validate()?;
    let kind = match spec.method {
        Method::Mwa => {
            if frame.len() < spec.window {
                return Err(Error::InsufficientHistory {
                    needed: spec.window,
                    available: frame.len(),
                });
            }
            ForecasterKind::WindowAverage
        }
        Method::Slr | Method::Mlr => {
            let matrix =
                build_lag_matrix(frame, spec.method.features(), spec.lags, spec.horizon)?;
            ForecasterKind::Regression(ols_fit(&matrix, spec.normalize, spec.ridge_eps)?)
        }
    };
    Ok(FittedForecaster { spec: spec.clone(), kind })
}

/// Free-function form of [`FittedForecaster::predict_at`].
pub fn predict_at(
    forecaster: &FittedForecaster,
    frame: &FeatureFrame,
    origin: usize,
) -> Result<f64> {
    forecaster.predict_at(frame, origin)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::series::DailySeries;

    fn frame_of(values: Vec<f64>) -> FeatureFrame {
        let series = DailySeries::new("2024-01-01".parse().unwrap(), values).unwrap();
        FeatureFrame::rewards_only(series)
    }

    #[test]
    fn mwa_is_the_trailing_mean() {
        let history = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        assert_eq!(mwa_predict(&history, 7, 1).unwrap(), 4.0);
    }

    #[test]
    fn mwa_on_constant_history_returns_the_level() {
        let history = [0.05; 30];
        for horizon in 1..=7 {
            assert_relative_eq!(
                mwa_predict(&history, 7, horizon).unwrap(),
                0.05,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn mwa_ignores_the_horizon() {
        let history = [2.0, 4.0, 6.0];
        assert_eq!(mwa_predict(&history, 3, 5).unwrap(), 4.0);
        assert_eq!(
            mwa_predict(&history, 3, 5).unwrap(),
            mwa_predict(&history, 3, 1).unwrap()
        );
    }

    #[test]
    fn mwa_needs_window_observations() {
        let err = mwa_predict(&[1.0, 2.0], 7, 1).unwrap_err();
        assert!(matches!(err, Error::InsufficientHistory { needed: 7, available: 2 }));
    }

    #[test]
    fn constant_frame_fits_constant_forecaster() {
        let frame = frame_of(vec![0.05; 40]);
        for horizon in [1, 4, 7] {
            let spec = ForecastSpec::new(Method::Slr).with_horizon(horizon);
            let f = fit_direct(&frame, &spec).unwrap();
            let pred = f.predict_at(&frame, frame.len() - 1).unwrap();
            assert!((pred - 0.05).abs() < 1e-6, "horizon {horizon}: got {pred}");
        }
    }

    #[test]
    fn slr_continues_a_noiseless_trend() {
        let level = 1.0;
        let slope = 2.0;
        let values: Vec<f64> = (0..60).map(|t| level + slope * t as f64).collect();
        let frame = frame_of(values);
        let spec = ForecastSpec::new(Method::Slr);
        let f = fit_direct(&frame, &spec).unwrap();
        for origin in [10, 30, 59] {
            let pred = f.predict_at(&frame, origin).unwrap();
            let truth = level + slope * (origin as f64 + 1.0);
            assert!((pred - truth).abs() < 1e-6, "origin {origin}: {pred} vs {truth}");
        }
    }

    #[test]
    fn slr_trend_continuation_beyond_frame_end() {
        let level = 0.5;
        let slope = 0.01;
        let values: Vec<f64> = (0..50).map(|t| level + slope * t as f64).collect();
        let frame = frame_of(values);
        for horizon in [1, 3, 7] {
            let spec = ForecastSpec::new(Method::Slr).with_horizon(horizon);
            let f = fit_direct(&frame, &spec).unwrap();
            let origin = frame.len() - 1;
            let pred = f.predict_at(&frame, origin).unwrap();
            let truth = level + slope * (origin as f64 + horizon as f64);
            assert!((pred - truth).abs() < 1e-6, "n={horizon}: {pred} vs {truth}");
        }
    }

    #[test]
    fn mlr_requires_all_three_features() {
        let frame = frame_of((0..40).map(f64::from).collect());
        let err = fit_direct(&frame, &ForecastSpec::new(Method::Mlr)).unwrap_err();
        assert!(matches!(err, Error::MissingFeature(FeatureKind::Price)));
    }

    #[test]
    fn predict_at_matches_mwa_on_prefix() {
        let frame = frame_of(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let f = fit_direct(&frame, &ForecastSpec::new(Method::Mwa)).unwrap();
        assert_eq!(f.predict_at(&frame, 6).unwrap(), 4.0);
    }

    #[test]
    fn predict_at_rejects_short_history() {
        let frame = frame_of((0..20).map(f64::from).collect());
        let f = fit_direct(&frame, &ForecastSpec::new(Method::Mwa)).unwrap();
        let err = f.predict_at(&frame, 2).unwrap_err();
        assert!(matches!(err, Error::InsufficientHistory { needed: 7, .. }));
    }

    #[test]
    fn predictions_ignore_values_after_the_origin() {
        let mut values: Vec<f64> = (0..40).map(|t| 1.0 + 0.01 * t as f64).collect();
        let frame = frame_of(values.clone());
        let origin = 20;
        let specs = [ForecastSpec::new(Method::Mwa), ForecastSpec::new(Method::Slr)];
        for spec in &specs {
            let f = fit_direct(&frame.slice(0..15), spec).unwrap();
            let before = f.predict_at(&frame, origin).unwrap();
            // Corrupt everything after the origin.
            for v in values.iter_mut().skip(origin + 1) {
                *v = 999.0;
            }
            let corrupted = frame_of(values.clone());
            let after = f.predict_at(&corrupted, origin).unwrap();
            assert_eq!(before.to_bits(), after.to_bits(), "{:?} looked ahead", spec.method);
        }
    }

    #[test]
    fn mwa_horizon_invariance_via_predict_at() {
        let values: Vec<f64> = (0..30).map(|t| (t as f64 * 0.7).sin() + 2.0).collect();
        let frame = frame_of(values);
        let one = fit_direct(&frame, &ForecastSpec::new(Method::Mwa).with_horizon(1)).unwrap();
        let seven = fit_direct(&frame, &ForecastSpec::new(Method::Mwa).with_horizon(7)).unwrap();
        for origin in 6..frame.len() {
            assert_eq!(
                one.predict_at(&frame, origin).unwrap(),
                seven.predict_at(&frame, origin).unwrap()
            );
        }
    }

    #[test]
    fn slr_shift_equivariance_with_intercept() {
        let base: Vec<f64> = (0..50)
            .map(|t| 1.0 + 0.02 * t as f64 + (t as f64 * 1.3).sin() * 0.05)
            .collect();
        let shift = 10.0;
        let shifted: Vec<f64> = base.iter().map(|v| v + shift).collect();
        let spec = ForecastSpec::new(Method::Slr);
        assert!(!spec.normalize);
        let f_base = fit_direct(&frame_of(base.clone()), &spec).unwrap();
        let f_shift = fit_direct(&frame_of(shifted.clone()), &spec).unwrap();
        for origin in [6, 20, 49] {
            let a = f_base.predict_at(&frame_of(base.clone()), origin).unwrap();
            let b = f_shift.predict_at(&frame_of(shifted.clone()), origin).unwrap();
            assert_relative_eq!(b, a + shift, max_relative = 1e-9);
        }
    }

    #[test]
    fn spec_validation_rejects_zeros() {
        assert!(ForecastSpec::new(Method::Mwa).with_window(0).validate().is_err());
        assert!(ForecastSpec::new(Method::Slr).with_lags(0).validate().is_err());
        assert!(ForecastSpec::new(Method::Slr).with_horizon(0).validate().is_err());
    }

    #[test]
    fn method_parsing_round_trips() {
        for method in [Method::Mwa, Method::Slr, Method::Mlr] {
            assert_eq!(method.as_str().parse::<Method>().unwrap(), method);
            assert_eq!(method.label().parse::<Method>().unwrap(), method);
        }
        assert!("arima".parse::<Method>().is_err());
    }
}
