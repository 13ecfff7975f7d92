//! Report artifacts: per-day CSV, metrics CSV, and a static SVG chart.
//!
//! Floats are written with `to_string`, the shortest representation that
//! parses back to the same bits, so a re-read report is the in-memory
//! report.

use super::{BacktestReport, DayRecord, StrategyMetrics};
use crate::error::{Error, Result};
use chrono::NaiveDate;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn data_err(path: &Path, message: impl ToString) -> Error {
    Error::Data {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Write `report_<ticker>.csv`, `metrics_<ticker>.csv`, and
/// `plot_<ticker>.svg` into `dir`; returns the three paths in that order.
pub fn emit_report(report: &BacktestReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let report_path = dir.join(format!("report_{}.csv", report.ticker));
    let metrics_path = dir.join(format!("metrics_{}.csv", report.ticker));
    let plot_path = dir.join(format!("plot_{}.svg", report.ticker));

    let mut writer = csv::Writer::from_path(&report_path)
        .map_err(|e| data_err(&report_path, e))?;
    writer
        .write_record(["date", "actual", "baseline", "adjusted"])
        .map_err(|e| data_err(&report_path, e))?;
    for r in &report.records {
        writer
            .write_record([
                r.date.format("%Y-%m-%d").to_string(),
                r.actual.to_string(),
                r.baseline.to_string(),
                r.adjusted.to_string(),
            ])
            .map_err(|e| data_err(&report_path, e))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(report_path.display().to_string(), e))?;

    let mut writer = csv::Writer::from_path(&metrics_path)
        .map_err(|e| data_err(&metrics_path, e))?;
    writer
        .write_record(["strategy", "rmse", "mae", "directional_accuracy", "config"])
        .map_err(|e| data_err(&metrics_path, e))?;
    for (name, m) in [("baseline", &report.baseline), ("adjusted", &report.adjusted)] {
        writer
            .write_record([
                name.to_string(),
                m.rmse.to_string(),
                m.mae.to_string(),
                m.directional_accuracy.to_string(),
                report.config.clone(),
            ])
            .map_err(|e| data_err(&metrics_path, e))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(metrics_path.display().to_string(), e))?;

    std::fs::write(&plot_path, render_svg(report))
        .map_err(|e| Error::io(plot_path.display().to_string(), e))?;

    Ok(vec![report_path, metrics_path, plot_path])
}

/// Read a per-day report back. Inverse of the `report_*.csv` half of
/// [`emit_report`].
pub fn read_report_csv(path: &Path) -> Result<Vec<DayRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| data_err(path, e))?;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| data_err(path, e))?;
        if row.len() != 4 {
            return Err(data_err(path, format!("expected 4 columns, got {}", row.len())));
        }
        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
            .map_err(|e| data_err(path, format!("bad date `{}`: {e}", &row[0])))?;
        let parse = |field: &str| -> Result<f64> {
            field
                .parse()
                .map_err(|_| data_err(path, format!("bad value `{field}`")))
        };
        records.push(DayRecord {
            date,
            actual: parse(&row[1])?,
            baseline: parse(&row[2])?,
            adjusted: parse(&row[3])?,
        });
    }
    Ok(records)
}

/// Read the two metric rows back as `(strategy, metrics, config)` tuples.
pub fn read_metrics_csv(path: &Path) -> Result<Vec<(String, StrategyMetrics, String)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| data_err(path, e))?;
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| data_err(path, e))?;
        if row.len() != 5 {
            return Err(data_err(path, format!("expected 5 columns, got {}", row.len())));
        }
        let parse = |field: &str| -> Result<f64> {
            field
                .parse()
                .map_err(|_| data_err(path, format!("bad value `{field}`")))
        };
        rows.push((
            row[0].to_string(),
            StrategyMetrics {
                rmse: parse(&row[1])?,
                mae: parse(&row[2])?,
                directional_accuracy: parse(&row[3])?,
            },
            row[4].to_string(),
        ));
    }
    Ok(rows)
}

/// RMSE and MAE of both strategies recomputed from day records, in the
/// same accumulation order the backtest used.
pub fn recompute_price_metrics(records: &[DayRecord]) -> (f64, f64, f64, f64) {
    let n = records.len() as f64;
    let mut base_sq = 0.0;
    let mut base_abs = 0.0;
    let mut adj_sq = 0.0;
    let mut adj_abs = 0.0;
    for r in records {
        base_sq += (r.baseline - r.actual) * (r.baseline - r.actual);
        base_abs += (r.baseline - r.actual).abs();
        adj_sq += (r.adjusted - r.actual) * (r.adjusted - r.actual);
        adj_abs += (r.adjusted - r.actual).abs();
    }
    (
        (base_sq / n).sqrt(),
        base_abs / n,
        (adj_sq / n).sqrt(),
        adj_abs / n,
    )
}

const PLOT_W: f64 = 1200.0;
const PLOT_H: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 50.0;
pub const ACTUAL_COLOR: &str = "#1f77b4";
pub const BASELINE_COLOR: &str = "#ff7f0e";
pub const ADJUSTED_COLOR: &str = "#2ca02c";

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let mut pts = String::new();
    for (x, y) in points {
        let _ = write!(pts, "{x:.2},{y:.2} ");
    }
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        pts.trim_end()
    )
}

/// A fixed 1200x600 chart of actual vs baseline vs adjusted closes.
fn render_svg(report: &BacktestReport) -> String {
    let records = &report.records;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in records {
        for v in [r.actual, r.baseline, r.adjusted] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = if hi > lo {
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    };
    let inner_w = PLOT_W - MARGIN_L - MARGIN_R;
    let inner_h = PLOT_H - MARGIN_T - MARGIN_B;
    let x = |i: usize| {
        let f = if records.len() > 1 {
            i as f64 / (records.len() - 1) as f64
        } else {
            0.5
        };
        MARGIN_L + f * inner_w
    };
    let y = |v: f64| MARGIN_T + (1.0 - (v - lo) / (hi - lo)) * inner_h;

    let series = |pick: fn(&DayRecord) -> f64| -> Vec<(f64, f64)> {
        records
            .iter()
            .enumerate()
            .map(|(i, r)| (x(i), y(pick(r))))
            .collect()
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\" \
         width=\"{PLOT_W}\" height=\"{PLOT_H}\">\n"
    );
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = write!(
        svg,
        "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{inner_w}\" height=\"{inner_h}\" \
         fill=\"none\" stroke=\"#ccc\"/>\n"
    );
    let _ = write!(
        svg,
        "  <text x=\"{}\" y=\"30\" font-family=\"sans-serif\" font-size=\"18\" \
         text-anchor=\"middle\">{} — actual vs baseline vs adjusted</text>\n",
        PLOT_W / 2.0,
        report.ticker
    );
    // Axis extents: price range on the left, date range along the bottom.
    let _ = write!(
        svg,
        "  <text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"end\">{hi:.2}</text>\n",
        MARGIN_L - 6.0,
        MARGIN_T + 12.0
    );
    let _ = write!(
        svg,
        "  <text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"end\">{lo:.2}</text>\n",
        MARGIN_L - 6.0,
        PLOT_H - MARGIN_B
    );
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        let _ = write!(
            svg,
            "  <text x=\"{MARGIN_L}\" y=\"{}\" font-family=\"sans-serif\" \
             font-size=\"12\">{}</text>\n",
            PLOT_H - MARGIN_B + 24.0,
            first.date
        );
        let _ = write!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{}</text>\n",
            PLOT_W - MARGIN_R,
            PLOT_H - MARGIN_B + 24.0,
            last.date
        );
    }
    svg.push_str(&polyline(&series(|r| r.actual), ACTUAL_COLOR));
    svg.push_str(&polyline(&series(|r| r.baseline), BASELINE_COLOR));
    svg.push_str(&polyline(&series(|r| r.adjusted), ADJUSTED_COLOR));
    for (i, (label, color)) in [
        ("actual", ACTUAL_COLOR),
        ("baseline", BASELINE_COLOR),
        ("adjusted", ADJUSTED_COLOR),
    ]
    .iter()
    .enumerate()
    {
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        let _ = write!(
            svg,
            "  <line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"3\"/>\n",
            MARGIN_L + inner_w - 130.0,
            MARGIN_L + inner_w - 100.0
        );
        let _ = write!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" \
             font-size=\"12\">{label}</text>\n",
            MARGIN_L + inner_w - 92.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
