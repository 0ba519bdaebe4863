//! OHLC and feature CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use trendcast_core::features::{FeatureRow, FEATURE_NAMES};
use trendcast_core::labeling::{LabelVector, TaskKind};
use trendcast_core::ohlc::{OhlcBar, OhlcSeries};

use crate::error::{AppError, CsvError};

pub const OHLC_HEADER: &str = "date,open,high,low,close";

fn parse_price(field: &str, what: &str, line: u64) -> Result<f64, CsvError> {
    field.trim().parse::<f64>().map_err(|_| CsvError::Malformed {
        line,
        detail: format!("{what} `{field}` is not a number"),
    })
}

/// Parses `date,open,high,low,close` rows. LF and CRLF line endings are
/// accepted; rows must already be in increasing date order.
pub fn parse_ohlc(text: &str, market: &str) -> Result<OhlcSeries, CsvError> {
    if text.trim().is_empty() {
        return Err(CsvError::Empty);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CsvError::Malformed {
            line: 1,
            detail: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != OHLC_HEADER {
        return Err(CsvError::Header {
            expected: OHLC_HEADER,
            found: header,
        });
    }
    let mut bars = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CsvError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            detail: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| {
            CsvError::Malformed {
                line,
                detail: format!("date `{}` is not YYYY-MM-DD", &record[0]),
            }
        })?;
        let open = parse_price(&record[1], "open", line)?;
        let high = parse_price(&record[2], "high", line)?;
        let low = parse_price(&record[3], "low", line)?;
        let close = parse_price(&record[4], "close", line)?;
        bars.push(OhlcBar::new(date, open, high, low, close)?);
    }
    Ok(OhlcSeries::new(market, bars)?)
}

pub fn read_ohlc(path: &Path, market: &str) -> Result<OhlcSeries, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_ohlc(&text, market).map_err(|source| AppError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Inverse of [`parse_ohlc`]. Prices use the shortest exact decimal form.
pub fn write_ohlc(series: &OhlcSeries) -> String {
    let mut out = String::with_capacity(40 * (series.len() + 1));
    out.push_str(OHLC_HEADER);
    out.push('\n');
    for b in series.bars() {
        let _ = writeln!(out, "{},{},{},{},{}", b.date, b.open, b.high, b.low, b.close);
    }
    out
}

/// Feature rows with the four label columns `y_op,y_hi,y_lo,y_cl`. The
/// last row of a series has no next day and its label cells stay empty.
pub fn write_features(rows: &[FeatureRow], labels: &[LabelVector]) -> String {
    let mut out = String::from("date");
    for name in FEATURE_NAMES {
        out.push(',');
        out.push_str(name);
    }
    for task in TaskKind::ALL {
        let _ = write!(out, ",y_{}", task.id());
    }
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        let _ = write!(out, "{}", row.date);
        for v in row.values() {
            let _ = write!(out, ",{v}");
        }
        for task in TaskKind::ALL {
            out.push(',');
            if let Some(y) = labels
                .iter()
                .find(|l| l.task == task)
                .and_then(|l| l.labels.get(k))
            {
                let _ = write!(out, "{y}");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let s = parse_ohlc("date,open,high,low,close\n2019-04-01,100,101,99,100.5\n", "M").unwrap();
        assert_eq!(s.len(), 1);
        let b = s.bars()[0];
        assert_eq!((b.open, b.high, b.low, b.close), (100.0, 101.0, 99.0, 100.5));
        assert_eq!(b.date, NaiveDate::from_ymd_opt(2019, 4, 1).unwrap());
    }

    #[test]
    fn crlf_is_accepted() {
        let s = parse_ohlc(
            "date,open,high,low,close\r\n2019-04-01,100,101,99,100.5\r\n2019-04-02,1,2,1,1\r\n",
            "M",
        )
        .unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn invariant_violation_names_the_date() {
        let e = parse_ohlc("date,open,high,low,close\n2019-04-01,101,101,102,101\n", "M").unwrap_err();
        assert!(e.to_string().starts_with("bar invariant violated at 2019-04-01"), "{e}");
    }

    #[test]
    fn duplicate_dates_rejected() {
        let e = parse_ohlc(
            "date,open,high,low,close\n2019-04-01,1,1,1,1\n2019-04-01,1,1,1,1\n",
            "M",
        )
        .unwrap_err();
        assert!(e.to_string().starts_with("non-increasing dates"), "{e}");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_ohlc("", "M"), Err(CsvError::Empty)));
        assert!(matches!(
            parse_ohlc("date,open,high,low\n2019-04-01,1,1,1\n", "M"),
            Err(CsvError::Header { .. })
        ));
        assert!(matches!(
            parse_ohlc("date,open,high,low,close\n2019-04-01,x,1,1,1\n", "M"),
            Err(CsvError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_ohlc("date,open,high,low,close\n04/01/2019,1,1,1,1\n", "M"),
            Err(CsvError::Malformed { .. })
        ));
        assert!(matches!(
            parse_ohlc("date,open,high,low,close\n2019-04-01,1,1,1\n", "M"),
            Err(CsvError::Malformed { .. })
        ));
        assert!(parse_ohlc("date,open,high,low,close\n", "M").is_err());
    }
}
