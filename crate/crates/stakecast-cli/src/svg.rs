//! Standalone SVG line charts of prediction traces.
//!
//! One polyline per series (the actuals plus each method's predictions) in a
//! fixed-size frame with date and value axis labels. Polylines are used for
//! data series only, so a chart with k series contains exactly k polyline
//! elements.

use std::fmt::Write as _;

use chrono::NaiveDate;

use crate::pipeline::{CliError, Stage};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 460.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 4] = ["#1a1a1a", "#d62728", "#1f77b4", "#2ca02c"];

/// A named line of the chart; every series must have one value per date.
pub struct ChartSeries {
    pub name: String,
    pub values: Vec<f64>,
}

/// Renders a line chart of the given series over the dates.
///
/// Fails with an `empty trace` report error when there is nothing to draw.
pub fn render_chart(
    title: &str,
    dates: &[NaiveDate],
    series: &[ChartSeries],
) -> Result<String, CliError> {
    if dates.is_empty() || series.is_empty() {
        return Err(CliError::new(Stage::Report, "empty trace"));
    }
    for s in series {
        if s.values.len() != dates.len() {
            return Err(CliError::new(
                Stage::Report,
                format!("series '{}' has {} values for {} dates", s.name, s.values.len(), dates.len()),
            ));
        }
    }

    let all = series.iter().flat_map(|s| s.values.iter().copied());
    let (min, max) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let pad = if max > min { (max - min) * 0.05 } else { max.abs().max(1.0) * 0.05 };
    let (lo, hi) = (min - pad, max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |i: usize| {
        if dates.len() == 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * i as f64 / (dates.len() - 1) as f64
        }
    };
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        title
    );

    // Axes.
    let x0 = MARGIN_LEFT;
    let x1 = MARGIN_LEFT + plot_w;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        out,
        r##"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#666666"/>"##
    );
    let _ = writeln!(
        out,
        r##"<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" stroke="#666666"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{x0}" y="{}" text-anchor="middle">{}</text>"#,
        y0 + 20.0,
        dates[0]
    );
    let _ = writeln!(
        out,
        r#"<text x="{x1}" y="{}" text-anchor="middle">{}</text>"#,
        y0 + 20.0,
        dates[dates.len() - 1]
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
        x0 - 8.0,
        y0 + 4.0,
        lo
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
        x0 - 8.0,
        MARGIN_TOP + 4.0,
        hi
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            points.join(" "),
            color
        );
        let legend_y = MARGIN_TOP + 16.0 * idx as f64 + 8.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{legend_y}" fill="{color}">{}</text>"#,
            x1 + 12.0,
            s.name
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let start: NaiveDate = "2024-01-01".parse().unwrap();
        (0..n as u64).map(|i| start + chrono::Days::new(i)).collect()
    }

    fn polyline_count(svg: &str) -> usize {
        svg.matches("<polyline").count()
    }

    #[test]
    fn two_point_trace_with_one_method_has_two_polylines() {
        let series = vec![
            ChartSeries { name: "actual".into(), values: vec![0.05, 0.06] },
            ChartSeries { name: "MWA".into(), values: vec![0.05, 0.055] },
        ];
        let svg = render_chart("demo", &dates(2), &series).unwrap();
        assert_eq!(polyline_count(&svg), 2);
        assert!(svg.contains("2024-01-01"));
        assert!(svg.contains("2024-01-02"));
    }

    #[test]
    fn two_methods_add_a_third_polyline() {
        let series = vec![
            ChartSeries { name: "actual".into(), values: vec![0.05, 0.06, 0.055] },
            ChartSeries { name: "MWA".into(), values: vec![0.05, 0.055, 0.056] },
            ChartSeries { name: "SLR".into(), values: vec![0.051, 0.058, 0.057] },
        ];
        let svg = render_chart("demo", &dates(3), &series).unwrap();
        assert_eq!(polyline_count(&svg), 3);
    }

    #[test]
    fn empty_trace_is_rejected() {
        let err = render_chart("demo", &[], &[]).unwrap_err();
        assert_eq!(err.to_string(), "report: empty trace");
    }

    #[test]
    fn flat_series_still_renders() {
        let series = vec![ChartSeries { name: "actual".into(), values: vec![0.05; 5] }];
        let svg = render_chart("flat", &dates(5), &series).unwrap();
        assert_eq!(polyline_count(&svg), 1);
    }
}
