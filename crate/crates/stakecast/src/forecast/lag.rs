//! Lagged design-matrix construction for the regression forecasters.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::series::{FeatureFrame, FeatureKind};

/// One design column: `feature` observed `days_back` days before the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagColumn {
    pub feature: FeatureKind,
    pub days_back: usize,
}

/// A lagged regression design: one row per valid forecast origin.
///
/// Row `i` holds, for each selected feature, the `lags` consecutive values
/// ending at origin day `t` (oldest first), and targets the rewards value at
/// `t + horizon`. For a frame of length `T` there are `T - lags - horizon + 1`
/// rows.
#[derive(Debug, Clone)]
pub struct LagMatrix {
    layout: Vec<LagColumn>,
    rows: Vec<f64>,
    targets: Vec<f64>,
    origins: Vec<NaiveDate>,
    lags: usize,
    horizon: usize,
}

impl LagMatrix {
    /// Builds a design directly from row-major feature values and targets,
    /// for fitting data that did not come out of a frame. The columns are
    /// booked as `width` lags of the rewards series and the origins as
    /// consecutive days from the epoch.
    pub fn from_rows(width: usize, rows: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if width == 0 || targets.is_empty() || rows.len() != targets.len() * width {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: targets.len() * width.max(1),
            });
        }
        if rows.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries("non-finite design entry".into()));
        }
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
        let origins = (0..targets.len() as u64)
            .map(|i| epoch + chrono::Days::new(i))
            .collect();
        Ok(Self {
            layout: layout_for(&[FeatureKind::Rewards], width),
            rows,
            targets,
            origins,
            lags: width,
            horizon: 1,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    /// Number of columns: features × lags.
    pub fn width(&self) -> usize {
        self.layout.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Column layout, in row order.
    pub fn layout(&self) -> &[LagColumn] {
        &self.layout
    }

    /// Forecast-origin date of each row.
    pub fn origins(&self) -> &[NaiveDate] {
        &self.origins
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// Orders and deduplicates the requested features canonically
/// (rewards, price, trends) and checks availability in the frame.
fn resolve_features(frame: &FeatureFrame, features: &[FeatureKind]) -> Result<Vec<FeatureKind>> {
    if !features.contains(&FeatureKind::Rewards) {
        return Err(Error::MissingFeature(FeatureKind::Rewards));
    }
    let mut selected = Vec::new();
    for kind in FeatureKind::ALL {
        if features.contains(&kind) {
            if !frame.has(kind) {
                return Err(Error::MissingFeature(kind));
            }
            selected.push(kind);
        }
    }
    Ok(selected)
}

fn layout_for(features: &[FeatureKind], lags: usize) -> Vec<LagColumn> {
    features
        .iter()
        .flat_map(|&feature| {
            (0..lags)
                .rev()
                .map(move |days_back| LagColumn { feature, days_back })
        })
        .collect()
}

/// Builds the lagged design for `features` with `lags` inputs per feature and
/// a `horizon`-day-ahead rewards target.
pub fn build_lag_matrix(
    frame: &FeatureFrame,
    features: &[FeatureKind],
    lags: usize,
    horizon: usize,
) -> Result<LagMatrix> {
    let selected = resolve_features(frame, features)?;
    let needed = lags + horizon;
    if frame.len() < needed {
        return Err(Error::FrameTooShort {
            needed,
            available: frame.len(),
        });
    }

    let layout = layout_for(&selected, lags);
    let n_rows = frame.len() - lags - horizon + 1;
    let mut rows = Vec::with_capacity(n_rows * layout.len());
    let mut targets = Vec::with_capacity(n_rows);
    let mut origins = Vec::with_capacity(n_rows);
    let rewards = frame.rewards().values();

    for t in (lags - 1)..(frame.len() - horizon) {
        for col in &layout {
            let series = frame.feature(col.feature).expect("checked above");
            rows.push(series.values()[t - col.days_back]);
        }
        targets.push(rewards[t + horizon]);
        origins.push(frame.date_at(t));
    }

    Ok(LagMatrix {
        layout,
        rows,
        targets,
        origins,
        lags,
        horizon,
    })
}

/// Assembles the feature vector for `layout` at forecast origin `origin`,
/// reading only values at indices `<= origin`.
pub(crate) fn feature_vector_at(
    frame: &FeatureFrame,
    layout: &[LagColumn],
    lags: usize,
    origin: usize,
) -> Result<Vec<f64>> {
    if origin >= frame.len() || origin + 1 < lags {
        return Err(Error::InsufficientHistory {
            needed: lags,
            available: (origin + 1).min(frame.len()),
        });
    }
    layout
        .iter()
        .map(|col| {
            let series = frame
                .feature(col.feature)
                .ok_or(Error::MissingFeature(col.feature))?;
            Ok(series.values()[origin - col.days_back])
        })
        .collect()
}
