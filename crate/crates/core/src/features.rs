//! Per-day feature rows and genre masks.
//!
//! A full row has 16 columns in a fixed order:
//!
//! ```text
//! open,high,low,close,                       intrinsic
//! dc_u,dc_l,dc_m,bb_u,bb_l,bb_m,kc_u,kc_l,kc_m  historical (channels)
//! r_hi,r_lo,r_cl                             nowcast (log ratios to open)
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::{self, IndicatorParams};
use crate::ohlc::{OhlcBar, OhlcSeries};

pub const N_FEATURES: usize = 16;

/// Canonical column names, in row order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "open", "high", "low", "close", "dc_u", "dc_l", "dc_m", "bb_u", "bb_l", "bb_m", "kc_u", "kc_l",
    "kc_m", "r_hi", "r_lo", "r_cl",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NowcastFeatures {
    /// `ln(high / open)`, never negative.
    pub r_hi: f64,
    /// `ln(low / open)`, never positive.
    pub r_lo: f64,
    /// `ln(close / open)`.
    pub r_cl: f64,
}

/// Intraday log ratios of high, low and close to the open.
pub fn nowcast(bar: &OhlcBar) -> Result<NowcastFeatures> {
    bar.validate()?;
    Ok(NowcastFeatures {
        r_hi: libm::log(bar.high / bar.open),
        r_lo: libm::log(bar.low / bar.open),
        r_cl: libm::log(bar.close / bar.open),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub date: NaiveDate,
    pub intrinsic: [f64; 4],
    /// Donchian, Bollinger, Keltner; each as upper, lower, middle.
    pub historical: [f64; 9],
    pub nowcast: [f64; 3],
}

impl FeatureRow {
    pub fn values(&self) -> [f64; N_FEATURES] {
        let mut out = [0.0; N_FEATURES];
        out[..4].copy_from_slice(&self.intrinsic);
        out[4..13].copy_from_slice(&self.historical);
        out[13..].copy_from_slice(&self.nowcast);
        out
    }
}

/// Builds one row per day from the first day on which every channel is
/// defined (`window_n - 1` in the default mode). Row `t` uses bars `..=t`
/// only.
pub fn assemble(series: &OhlcSeries, params: &IndicatorParams) -> Result<Vec<FeatureRow>> {
    params.validate()?;
    let first = params.first_defined_index();
    if series.len() < first + 1 {
        return Err(Error::SeriesTooShort {
            required: first + 1,
            available: series.len(),
        });
    }
    let dc = indicators::donchian(series, params.window_n)?;
    let bb = indicators::bollinger(series, params)?;
    let kc = indicators::keltner(series, params)?;

    let mut rows = Vec::with_capacity(series.len() - first);
    for (t, bar) in series.bars().iter().enumerate().skip(first) {
        let (dc, bb, kc) = match (dc[t], bb[t], kc[t]) {
            (Some(dc), Some(bb), Some(kc)) => (dc, bb, kc),
            _ => unreachable!("all channels are defined from the first feature index"),
        };
        let now = nowcast(bar)?;
        rows.push(FeatureRow {
            date: bar.date,
            intrinsic: [bar.open, bar.high, bar.low, bar.close],
            historical: [
                dc.upper, dc.lower, dc.middle, bb.upper, bb.lower, bb.middle, kc.upper, kc.lower,
                kc.middle,
            ],
            nowcast: [now.r_hi, now.r_lo, now.r_cl],
        });
    }
    Ok(rows)
}

/// Which feature genres (and which channels within the historical genre)
/// to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureSetMask {
    pub intrinsic: bool,
    pub donchian: bool,
    pub bollinger: bool,
    pub keltner: bool,
    pub nowcast: bool,
}

impl FeatureSetMask {
    pub const INT: Self = Self::new(true, false, false);
    pub const INT_HIST: Self = Self::new(true, true, false);
    pub const INT_NOW: Self = Self::new(true, false, true);
    pub const ALL: Self = Self::new(true, true, true);

    /// The four coarse sets reported by default.
    pub const DEFAULT_SETS: [Self; 4] = [Self::INT, Self::INT_HIST, Self::INT_NOW, Self::ALL];

    pub const fn new(intrinsic: bool, historical: bool, nowcast: bool) -> Self {
        Self {
            intrinsic,
            donchian: historical,
            bollinger: historical,
            keltner: historical,
            nowcast,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.intrinsic || self.donchian || self.bollinger || self.keltner || self.nowcast)
    }

    pub fn has_full_history(&self) -> bool {
        self.donchian && self.bollinger && self.keltner
    }

    /// Indices into the canonical 16-column order, ascending.
    pub fn column_indices(&self) -> Vec<usize> {
        let groups: [(bool, core::ops::Range<usize>); 5] = [
            (self.intrinsic, 0..4),
            (self.donchian, 4..7),
            (self.bollinger, 7..10),
            (self.keltner, 10..13),
            (self.nowcast, 13..16),
        ];
        groups
            .into_iter()
            .filter(|(on, _)| *on)
            .flat_map(|(_, r)| r)
            .collect()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.column_indices()
            .into_iter()
            .map(|i| FEATURE_NAMES[i].to_string())
            .collect()
    }
}

impl fmt::Display for FeatureSetMask {
    /// `INT+HIST+NOW` style; partial history is spelled per channel.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = Vec::new();
        if self.intrinsic {
            parts.push("INT");
        }
        if self.has_full_history() {
            parts.push("HIST");
        } else {
            if self.donchian {
                parts.push("DC");
            }
            if self.bollinger {
                parts.push("BB");
            }
            if self.keltner {
                parts.push("KC");
            }
        }
        if self.nowcast {
            parts.push("NOW");
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for FeatureSetMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut mask = Self::new(false, false, false);
        for token in s.split('+').map(str::trim).filter(|t| !t.is_empty()) {
            match token.to_ascii_uppercase().as_str() {
                "INT" => mask.intrinsic = true,
                "HIST" => {
                    mask.donchian = true;
                    mask.bollinger = true;
                    mask.keltner = true;
                }
                "DC" => mask.donchian = true,
                "BB" => mask.bollinger = true,
                "KC" => mask.keltner = true,
                "NOW" => mask.nowcast = true,
                other => {
                    return Err(Error::UnknownName(format!("feature genre `{other}`")));
                }
            }
        }
        if mask.is_empty() {
            return Err(Error::InvalidParameter(format!("empty feature set `{s}`")));
        }
        Ok(mask)
    }
}

/// Dense row-major matrix with named columns and one date per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    dates: Vec<NaiveDate>,
    columns: Vec<String>,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(dates: Vec<NaiveDate>, columns: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Empty("feature matrix has no columns"));
        }
        if data.len() != dates.len() * columns.len() {
            return Err(Error::LengthMismatch {
                what: "matrix data vs rows x columns",
                left: data.len(),
                right: dates.len() * columns.len(),
            });
        }
        Ok(Self {
            dates,
            columns,
            data,
        })
    }

    /// Builds from explicit rows. Dates default to consecutive days from
    /// 2000-01-01 when not supplied.
    pub fn from_rows(columns: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..rows.len())
            .map(|i| start + chrono::Days::new(i as u64))
            .collect();
        let mut data = Vec::with_capacity(rows.len() * columns.len());
        for row in rows {
            if row.len() != columns.len() {
                return Err(Error::LengthMismatch {
                    what: "row width vs column count",
                    left: row.len(),
                    right: columns.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dates, columns, data)
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.columns.len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.columns.len())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.columns.len() + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// Rows `range`, same columns.
    pub fn slice_rows(&self, range: core::ops::Range<usize>) -> Self {
        let w = self.columns.len();
        Self {
            dates: self.dates[range.clone()].to_vec(),
            columns: self.columns.clone(),
            data: self.data[range.start * w..range.end * w].to_vec(),
        }
    }

    /// Rows at `indices`, in the given order.
    pub fn take_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.columns.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            dates: indices.iter().map(|&i| self.dates[i]).collect(),
            columns: self.columns.clone(),
            data,
        }
    }

    /// First row index holding a non-finite value, with its column.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        let w = self.columns.len();
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / w, p % w))
    }
}

/// Projects full feature rows onto the columns enabled by `mask`.
pub fn select(rows: &[FeatureRow], mask: &FeatureSetMask) -> Result<FeatureMatrix> {
    if mask.is_empty() {
        return Err(Error::InvalidParameter("feature set mask selects no columns".into()));
    }
    if rows.is_empty() {
        return Err(Error::Empty("no feature rows to select from"));
    }
    let idx = mask.column_indices();
    let mut data = Vec::with_capacity(rows.len() * idx.len());
    for row in rows {
        let v = row.values();
        data.extend(idx.iter().map(|&i| v[i]));
    }
    FeatureMatrix::new(
        rows.iter().map(|r| r.date).collect(),
        mask.column_names(),
        data,
    )
}
