//! Daily time series and their alignment into multi-feature frames.
//!
//! [`RawSeries`] is a feed as read from disk: dates strictly increasing but
//! possibly with missing days. [`repair_gaps`] forward-fills short interior
//! gaps and produces a [`DailySeries`], which is gap-free by construction.
//! [`align`] joins up to three daily series on their common date range into a
//! [`FeatureFrame`].

use std::fmt;
use std::ops::Range;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// The feature slots a frame can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    /// Daily staking reward rate — the forecast target, always present.
    Rewards,
    /// Daily asset price.
    Price,
    /// Daily search-interest index.
    Trends,
}

impl FeatureKind {
    /// All kinds in canonical order.
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Rewards, FeatureKind::Price, FeatureKind::Trends];

    /// Lowercase name, used in file names and diagnostics.
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Rewards => "rewards",
            FeatureKind::Price => "price",
            FeatureKind::Trends => "trends",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_values_finite(values: &[f64]) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidSeries(format!(
            "non-finite value {} at index {pos}",
            values[pos]
        )));
    }
    Ok(())
}

/// A daily series as read from a feed: dates strictly increasing and values
/// finite, but interior gaps may remain. Produced by ingestion; turned into a
/// [`DailySeries`] by [`repair_gaps`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl RawSeries {
    /// Builds a raw series, checking that dates are strictly increasing,
    /// values finite, and lengths equal and nonzero.
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} dates vs {} values",
                dates.len(),
                values.len()
            )));
        }
        if dates.is_empty() {
            return Err(Error::InvalidSeries("empty series".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSeries(format!(
                "dates not strictly increasing near {}",
                w[0]
            )));
        }
        check_values_finite(&values)?;
        Ok(Self { dates, values })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl From<DailySeries> for RawSeries {
    fn from(series: DailySeries) -> Self {
        Self {
            dates: series.dates().collect(),
            values: series.values,
        }
    }
}

/// A gap-free daily time series: one finite value per calendar day.
///
/// Stored as a start date plus values; the date of index `i` is
/// `start + i` days, so contiguity holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    start: NaiveDate,
    values: Vec<f64>,
}

impl DailySeries {
    /// Builds a series starting at `start` with one value per day.
    pub fn new(start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("empty series".into()));
        }
        check_values_finite(&values)?;
        Ok(Self { start, values })
    }

    /// Builds a series from explicit dates, which must be contiguous days.
    pub fn from_dated(dates: &[NaiveDate], values: Vec<f64>) -> Result<Self> {
        if let Some(w) = dates.windows(2).find(|w| next_day(w[0]) != w[1]) {
            return Err(Error::InvalidSeries(format!(
                "dates not contiguous near {}",
                w[0]
            )));
        }
        if dates.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} dates vs {} values",
                dates.len(),
                values.len()
            )));
        }
        let start = *dates
            .first()
            .ok_or_else(|| Error::InvalidSeries("empty series".into()))?;
        Self::new(start, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.len() - 1)
    }

    /// Date of index `idx`.
    pub fn date_at(&self, idx: usize) -> NaiveDate {
        self.start
            .checked_add_days(Days::new(idx as u64))
            .expect("date arithmetic overflow")
    }

    /// Index of `date`, if it falls within the series.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = date.signed_duration_since(self.start).num_days();
        if offset >= 0 && (offset as usize) < self.len() {
            Some(offset as usize)
        } else {
            None
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates the dates of the series in order.
    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.len()).map(|i| self.date_at(i))
    }

    /// The sub-series covering `[from, to]`, if fully contained.
    pub fn window(&self, from: NaiveDate, to: NaiveDate) -> Option<DailySeries> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        if a > b {
            return None;
        }
        Some(DailySeries {
            start: from,
            values: self.values[a..=b].to_vec(),
        })
    }

    fn slice_range(&self, range: Range<usize>) -> DailySeries {
        DailySeries {
            start: self.date_at(range.start),
            values: self.values[range].to_vec(),
        }
    }
}

fn next_day(date: NaiveDate) -> NaiveDate {
    date.succ_opt().expect("date arithmetic overflow")
}

/// Forward-fills interior gaps of at most `max_gap` missing days.
///
/// A gap is filled by carrying the last observed value forward; a gap longer
/// than `max_gap` yields [`Error::GapTooLarge`]. Leading or trailing missing
/// days cannot exist in a [`RawSeries`], so the result is gap-free.
pub fn repair_gaps(series: &RawSeries, max_gap: u32) -> Result<DailySeries> {
    let dates = series.dates();
    let values = series.values();
    let mut filled = Vec::with_capacity(values.len());
    filled.push(values[0]);
    for i in 1..dates.len() {
        let gap_days = dates[i].signed_duration_since(dates[i - 1]).num_days() - 1;
        if gap_days > i64::from(max_gap) {
            return Err(Error::GapTooLarge {
                after: dates[i - 1],
                gap_days,
                max_gap,
            });
        }
        for _ in 0..gap_days {
            filled.push(values[i - 1]);
        }
        filled.push(values[i]);
    }
    DailySeries::new(dates[0], filled)
}

/// A date-aligned bundle of daily features: rewards (always present) plus
/// optional price and search-trends series, all spanning the same days.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    rewards: DailySeries,
    price: Option<DailySeries>,
    trends: Option<DailySeries>,
}

impl FeatureFrame {
    /// Frame holding a rewards series alone.
    pub fn rewards_only(rewards: DailySeries) -> Self {
        Self {
            rewards,
            price: None,
            trends: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn start_date(&self) -> NaiveDate {
        self.rewards.start_date()
    }

    pub fn end_date(&self) -> NaiveDate {
        self.rewards.end_date()
    }

    pub fn date_at(&self, idx: usize) -> NaiveDate {
        self.rewards.date_at(idx)
    }

    pub fn rewards(&self) -> &DailySeries {
        &self.rewards
    }

    /// The series for `kind`, if present.
    pub fn feature(&self, kind: FeatureKind) -> Option<&DailySeries> {
        match kind {
            FeatureKind::Rewards => Some(&self.rewards),
            FeatureKind::Price => self.price.as_ref(),
            FeatureKind::Trends => self.trends.as_ref(),
        }
    }

    pub fn has(&self, kind: FeatureKind) -> bool {
        self.feature(kind).is_some()
    }

    /// The sub-frame covering the index range, all features sliced alike.
    ///
    /// # Panics
    /// Panics if the range is empty or out of bounds.
    pub fn slice(&self, range: Range<usize>) -> FeatureFrame {
        assert!(
            !range.is_empty() && range.end <= self.len(),
            "slice range {range:?} invalid for frame of length {}",
            self.len()
        );
        FeatureFrame {
            rewards: self.rewards.slice_range(range.clone()),
            price: self.price.as_ref().map(|s| s.slice_range(range.clone())),
            trends: self.trends.as_ref().map(|s| s.slice_range(range)),
        }
    }
}

/// Joins daily series on the intersection of their date ranges.
///
/// All series are truncated to the common range; leading or trailing days
/// covered by only some feeds are dropped, never synthesized. Returns
/// [`Error::EmptyIntersection`] when no day is covered by every input.
pub fn align(
    rewards: &DailySeries,
    price: Option<&DailySeries>,
    trends: Option<&DailySeries>,
) -> Result<FeatureFrame> {
    let mut start = rewards.start_date();
    let mut end = rewards.end_date();
    for series in [price, trends].into_iter().flatten() {
        start = start.max(series.start_date());
        end = end.min(series.end_date());
    }
    if start > end {
        return Err(Error::EmptyIntersection);
    }
    let clip = |s: &DailySeries| s.window(start, end).expect("range within all series");
    Ok(FeatureFrame {
        rewards: clip(rewards),
        price: price.map(clip),
        trends: trends.map(clip),
    })
}
