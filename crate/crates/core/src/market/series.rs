//! Daily close series and CSV ingestion.

use crate::error::{Error, Result};
use chrono::NaiveDate;
use std::path::Path;

/// One ticker's daily closing prices, date-ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Build a series, enforcing strictly increasing dates and positive
    /// closes. `dates` and `closes` must already be date-sorted.
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        if dates.len() != closes.len() {
            return Err(Error::Dimension {
                context: "PriceSeries::new",
                expected: dates.len(),
                actual: closes.len(),
            });
        }
        for pair in dates.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Data {
                    path: ticker.clone(),
                    message: format!("dates not strictly increasing at {}", pair[1]),
                });
            }
        }
        for (i, &c) in closes.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Data {
                    path: ticker.clone(),
                    message: format!("close at {} is {c}, must be positive", dates[i]),
                });
            }
        }
        Ok(PriceSeries {
            ticker,
            dates,
            closes,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Read one ticker's series from a CSV with a `date,close` header.
///
/// Extra columns are ignored, rows may arrive in any order (output is
/// date-sorted), dates are ISO-8601. The ticker is the file stem.
pub fn ingest_csv(path: &Path) -> Result<PriceSeries> {
    let display = path.display().to_string();
    let ticker = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("UNKNOWN")
        .to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                if let csv::ErrorKind::Io(io) = e.into_kind() {
                    Error::io(&display, io)
                } else {
                    unreachable!()
                }
            }
            _ => Error::Parse {
                path: display.clone(),
                line: 1,
                message: e.to_string(),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: display.clone(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let date_col = col("date").ok_or_else(|| Error::Parse {
        path: display.clone(),
        line: 1,
        message: "missing `date` column".into(),
    })?;
    let close_col = col("close").ok_or_else(|| Error::Parse {
        path: display.clone(),
        line: 1,
        message: "missing `close` column".into(),
    })?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse {
                path: display.clone(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize, name: &str| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Parse {
                path: display.clone(),
                line,
                message: format!("missing `{name}` field"),
            })
        };
        let date_text = field(date_col, "date")?.trim();
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|_| Error::Parse {
            path: display.clone(),
            line,
            message: format!("bad date `{date_text}`, expected YYYY-MM-DD"),
        })?;
        let close_text = field(close_col, "close")?.trim();
        let close: f64 = close_text.parse().map_err(|_| Error::Parse {
            path: display.clone(),
            line,
            message: format!("bad close `{close_text}`"),
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::Data {
                path: display.clone(),
                message: format!("close {close} on {date} must be positive (line {line})"),
            });
        }
        rows.push((date, close));
    }

    rows.sort_by_key(|(d, _)| *d);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::Data {
                path: display.clone(),
                message: format!("duplicate date {}", pair[0].0),
            });
        }
    }
    let (dates, closes) = rows.into_iter().unzip();
    PriceSeries::new(ticker, dates, closes)
}
