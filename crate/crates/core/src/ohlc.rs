//! Daily OHLC bars, validated series and log-return volatility.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One trading day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    /// Builds a bar and checks positivity and `low <= open, close <= high`.
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> Result<Self> {
        let bar = Self {
            date,
            open,
            high,
            low,
            close,
        };
        bar.validate()?;
        Ok(bar)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |detail: String| Error::BarInvariant {
            date: self.date,
            detail,
        };
        for (name, v) in [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(fail(format!("{name} = {v} is not a positive finite price")));
            }
        }
        if self.low > self.high {
            return Err(fail(format!("low {} > high {}", self.low, self.high)));
        }
        if self.open < self.low || self.open > self.high {
            return Err(fail(format!(
                "open {} outside [{}, {}]",
                self.open, self.low, self.high
            )));
        }
        if self.close < self.low || self.close > self.high {
            return Err(fail(format!(
                "close {} outside [{}, {}]",
                self.close, self.low, self.high
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn price(&self, field: PriceField) -> f64 {
        match field {
            PriceField::Open => self.open,
            PriceField::High => self.high,
            PriceField::Low => self.low,
            PriceField::Close => self.close,
        }
    }

    /// Multiplies every price by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            date: self.date,
            open: self.open * factor,
            high: self.high * factor,
            low: self.low * factor,
            close: self.close * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceField {
    Open,
    High,
    Low,
    Close,
}

impl PriceField {
    pub const ALL: [PriceField; 4] = [
        PriceField::Open,
        PriceField::High,
        PriceField::Low,
        PriceField::Close,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PriceField::Open => "open",
            PriceField::High => "high",
            PriceField::Low => "low",
            PriceField::Close => "close",
        }
    }
}

impl fmt::Display for PriceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PriceField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" | "op" => Ok(PriceField::Open),
            "high" | "hi" => Ok(PriceField::High),
            "low" | "lo" => Ok(PriceField::Low),
            "close" | "cl" => Ok(PriceField::Close),
            other => Err(Error::UnknownName(format!("price field `{other}`"))),
        }
    }
}

/// An ordered run of bars for one market. Dates are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhlcSeries {
    market: String,
    bars: Vec<OhlcBar>,
}

impl OhlcSeries {
    /// Validates every bar and the strict date ordering. Never reorders.
    pub fn new(market: impl Into<String>, bars: Vec<OhlcBar>) -> Result<Self> {
        if bars.is_empty() {
            return Err(Error::Empty("series has no bars"));
        }
        for bar in &bars {
            bar.validate()?;
        }
        for pair in bars.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(Error::NonIncreasingDates {
                    prev: pair[0].date,
                    next: pair[1].date,
                });
            }
        }
        Ok(Self {
            market: market.into(),
            bars,
        })
    }

    pub fn market(&self) -> &str {
        &self.market
    }

    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn prices(&self, field: PriceField) -> Vec<f64> {
        self.bars.iter().map(|b| b.price(field)).collect()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.prices(PriceField::Close)
    }

    /// The first `len` bars. `len` must be in `1..=self.len()`.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.bars.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation length {len} outside 1..={}",
                self.bars.len()
            )));
        }
        Ok(Self {
            market: self.market.clone(),
            bars: self.bars[..len].to_vec(),
        })
    }

    /// Every price multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Self::new(
            self.market.clone(),
            self.bars.iter().map(|b| b.scaled(factor)).collect(),
        )
    }
}

/// Log-return statistics of one price field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilityStats {
    pub log_returns: Vec<f64>,
    pub mean_return: f64,
    /// Unbiased sample variance (divisor `N - 1`).
    pub variance: f64,
    pub daily_volatility: f64,
    pub periodized_volatility: f64,
    pub period_days: u32,
}

/// Volatility of `field` over the whole series: log returns, their mean,
/// sample variance, daily volatility and the `sqrt(period_days)`-scaled
/// volatility.
pub fn volatility(series: &OhlcSeries, field: PriceField, period_days: u32) -> Result<VolatilityStats> {
    if period_days == 0 {
        return Err(Error::InvalidParameter("period_days must be positive".into()));
    }
    if series.len() < 3 {
        return Err(Error::SeriesTooShort {
            required: 3,
            available: series.len(),
        });
    }
    let prices = series.prices(field);
    if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| **p <= 0.0) {
        return Err(Error::BarInvariant {
            date: series.bars()[i].date,
            detail: format!("non-positive {field} price {p}"),
        });
    }
    let log_returns: Vec<f64> = prices
        .windows(2)
        .map(|w| libm::log(w[1] / w[0]))
        .collect();
    let n = log_returns.len() as f64;
    let mean_return = log_returns.iter().sum::<f64>() / n;
    let variance = log_returns
        .iter()
        .map(|r| (r - mean_return) * (r - mean_return))
        .sum::<f64>()
        / (n - 1.0);
    let daily_volatility = libm::sqrt(variance);
    Ok(VolatilityStats {
        log_returns,
        mean_return,
        variance,
        daily_volatility,
        periodized_volatility: daily_volatility * libm::sqrt(period_days as f64),
        period_days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2019, 4, day).unwrap()
    }

    fn closes_series(closes: &[f64]) -> OhlcSeries {
        let bars = closes
            .iter()
            .enumerate()
            .map(|(i, &c)| OhlcBar::new(d(i as u32 + 1), c, c, c, c).unwrap())
            .collect();
        OhlcSeries::new("T", bars).unwrap()
    }

    #[test]
    fn low_above_high_is_rejected() {
        let err = OhlcBar::new(d(1), 101.0, 101.0, 102.0, 101.0).unwrap_err();
        assert!(matches!(err, Error::BarInvariant { .. }));
        assert!(alloc::string::ToString::to_string(&err)
            .starts_with("bar invariant violated at 2019-04-01"));
    }

    #[test]
    fn duplicate_dates_are_rejected() {
        let bars = vec![
            OhlcBar::new(d(1), 100.0, 101.0, 99.0, 100.5).unwrap(),
            OhlcBar::new(d(1), 100.0, 101.0, 99.0, 100.5).unwrap(),
        ];
        let err = OhlcSeries::new("T", bars).unwrap_err();
        assert!(alloc::string::ToString::to_string(&err).starts_with("non-increasing dates"));
    }

    #[test]
    fn non_positive_and_nan_prices_are_rejected() {
        assert!(OhlcBar::new(d(1), 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(OhlcBar::new(d(1), f64::NAN, 1.0, 0.5, 1.0).is_err());
        assert!(OhlcSeries::new("T", vec![]).is_err());
    }

    #[test]
    fn constant_series_has_zero_volatility() {
        let v = volatility(&closes_series(&[100.0; 4]), PriceField::Close, 252).unwrap();
        assert_eq!(v.log_returns, vec![0.0; 3]);
        assert_eq!(v.variance, 0.0);
        assert_eq!(v.daily_volatility, 0.0);
    }

    #[test]
    fn plus_minus_one_log_returns() {
        let e = core::f64::consts::E;
        let v = volatility(&closes_series(&[100.0, 100.0 * e, 100.0]), PriceField::Close, 1).unwrap();
        assert!((v.log_returns[0] - 1.0).abs() < 1e-15);
        assert!((v.log_returns[1] + 1.0).abs() < 1e-15);
        assert!(v.mean_return.abs() < 1e-15);
        assert!((v.variance - 2.0).abs() < 1e-14);
        assert!((v.daily_volatility - libm::sqrt(2.0)).abs() < 1e-14);
    }

    #[test]
    fn periodized_scales_by_sqrt_days() {
        let v = volatility(&closes_series(&[100.0, 103.0, 101.0, 104.0]), PriceField::Close, 252)
            .unwrap();
        assert_eq!(v.periodized_volatility, v.daily_volatility * libm::sqrt(252.0));
        assert_eq!(v.daily_volatility, libm::sqrt(v.variance));
    }

    #[test]
    fn volatility_needs_three_bars() {
        let err = volatility(&closes_series(&[1.0, 2.0]), PriceField::Close, 1).unwrap_err();
        assert!(matches!(err, Error::SeriesTooShort { .. }));
        assert!(volatility(&closes_series(&[1.0, 2.0, 3.0]), PriceField::Close, 0).is_err());
    }
}
