//! Markdown and CSV rendering of backtest reports.
//!
//! Markdown tables display RMSE/Mean to three decimals; the CSV output
//! carries full precision so nothing is lost for machine consumers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use stakecast::{EvalReport, Method};

use crate::pipeline::{CliError, Stage};

fn cell_text(report: &EvalReport, method: Method, horizon: usize) -> String {
    match report.cell(method, horizon) {
        Some(cell) if report.is_row_min(method, horizon) => {
            format!("**{:.3}**", cell.rmse_over_mean)
        }
        Some(cell) => format!("{:.3}", cell.rmse_over_mean),
        None => "—".to_string(),
    }
}

fn failure_notes(report: &EvalReport, out: &mut String) {
    if report.failures.is_empty() {
        return;
    }
    out.push_str("\nFailed cells:\n");
    for failure in &report.failures {
        let _ = writeln!(
            out,
            "- {} n={}: {}",
            failure.method, failure.horizon, failure.message
        );
    }
}

/// One row per method at a single horizon, Table-3 style.
pub fn render_backtest_md(label: &str, report: &EvalReport) -> String {
    let horizon = report.horizons.first().copied().unwrap_or(1);
    let mut out = String::new();
    let _ = writeln!(out, "## Backtest — {label} (RMSE/Mean, n={horizon})");
    out.push_str("\n| Method | RMSE/Mean | Points |\n|---|--:|--:|\n");
    for &method in &report.methods {
        let points = report
            .cell(method, horizon)
            .map_or_else(|| "—".to_string(), |c| c.n_points().to_string());
        let _ = writeln!(
            out,
            "| {} | {} | {} |",
            method,
            cell_text(report, method, horizon),
            points
        );
    }
    if let Some(cell) = report
        .horizons
        .first()
        .and_then(|&n| report.methods.iter().find_map(|&m| report.cell(m, n)))
    {
        let _ = writeln!(
            out,
            "\nDenominator: mean of pooled test actuals {:.6} (series mean {:.6}).",
            cell.pooled_mean_actual, cell.series_mean
        );
    }
    failure_notes(report, &mut out);
    out
}

/// One row per horizon with a column per method, Table-4 style; the smallest
/// cell of each row is bold.
pub fn render_sweep_md(label: &str, report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "## Horizon sweep — {label} (RMSE/Mean)");
    out.push_str("\n| N |");
    for &method in &report.methods {
        let _ = write!(out, " {method} |");
    }
    out.push('\n');
    out.push_str("|--:|");
    for _ in &report.methods {
        out.push_str("--:|");
    }
    out.push('\n');
    for &horizon in &report.horizons {
        let _ = write!(out, "| {horizon} |");
        for &method in &report.methods {
            let _ = write!(out, " {} |", cell_text(report, method, horizon));
        }
        out.push('\n');
    }
    failure_notes(report, &mut out);
    out
}

/// Full-precision long-format table: one row per evaluated cell.
pub fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("method,horizon,rmse_over_mean,n_points\n");
    for cell in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            cell.method.as_str(),
            cell.horizon,
            cell.rmse_over_mean,
            cell.n_points()
        );
    }
    out
}

/// Per-cell prediction trace: `trace_<method>_<n>.csv` with one row per
/// evaluated test day.
pub fn write_traces(out_dir: &Path, report: &EvalReport) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for cell in &report.cells {
        let mut out = String::from("date,actual,predicted\n");
        for point in &cell.trace {
            let _ = writeln!(out, "{},{},{}", point.date, point.actual, point.predicted);
        }
        let path = out_dir.join(format!("trace_{}_{}.csv", cell.method.as_str(), cell.horizon));
        write_file(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::new(Stage::Report, format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stakecast::{horizon_sweep, DailySeries, FeatureFrame, SweepConfig};

    fn constant_report(len: usize) -> EvalReport {
        let series =
            DailySeries::new("2024-01-01".parse().unwrap(), vec![0.05; len]).unwrap();
        let frame = FeatureFrame::rewards_only(series);
        horizon_sweep(&frame, &SweepConfig::new(vec![Method::Mwa, Method::Slr], 3))
    }

    fn data_rows(md: &str) -> Vec<&str> {
        md.lines()
            .filter(|l| l.starts_with("| ") && l[2..3].chars().all(|c| c.is_ascii_digit()))
            .collect()
    }

    #[test]
    fn sweep_table_has_one_row_per_horizon() {
        let md = render_sweep_md("demo", &constant_report(150));
        assert_eq!(data_rows(&md).len(), 3);
        assert!(md.contains("| N | MWA | SLR |"));
        assert!(md.contains("0.000"));
        assert!(!md.contains("Failed cells"));
    }

    #[test]
    fn failed_cells_render_as_dashes_with_notes() {
        let md = render_sweep_md("demo", &constant_report(119));
        assert!(md.contains("| 1 | — | — |"));
        assert!(md.contains("Failed cells:"));
        assert!(md.contains("- MWA n=1:"));
    }

    #[test]
    fn csv_is_long_format_full_precision() {
        let csv = render_csv(&constant_report(150));
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "method,horizon,rmse_over_mean,n_points");
        assert_eq!(csv.lines().count(), 1 + 6);
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 4);
            assert!(fields[0] == "mwa" || fields[0] == "slr");
            assert_eq!(fields[3], "60");
        }
    }

    #[test]
    fn every_row_flags_a_minimum() {
        let md = render_sweep_md("demo", &constant_report(150));
        let rows = data_rows(&md);
        assert!(!rows.is_empty());
        for line in rows {
            assert!(line.contains("**"), "no minimum flagged in {line}");
        }
    }
}
