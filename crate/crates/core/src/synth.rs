//! Deterministic synthetic OHLC series.
//!
//! All randomness comes from ChaCha8 seeded with `GenSpec::seed`, so a spec
//! always produces the same bars on every platform. Dates run over weekdays
//! from the start date.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ohlc::{OhlcBar, OhlcSeries};

/// Shortest series accepted: one full 20-day window plus a labeled day.
pub const MIN_DAYS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GenKind {
    /// Log closes follow a Gaussian random walk with per-day `drift` and
    /// `volatility`.
    GeometricRandomWalk {
        start: f64,
        drift: f64,
        volatility: f64,
    },
    /// Log closes follow `ln(start) + slope * t` plus independent noise.
    TrendWithNoise { start: f64, slope: f64, noise: f64 },
    /// Every price of every bar equals `price`.
    ConstantMarket { price: f64 },
    /// The next day's open moves in the direction of the current day's
    /// close-to-open move with probability `(1 + strength) / 2`.
    SeparableRegime {
        start: f64,
        volatility: f64,
        strength: f64,
    },
}

impl GenKind {
    pub fn name(&self) -> &'static str {
        match self {
            GenKind::GeometricRandomWalk { .. } => "geometric_random_walk",
            GenKind::TrendWithNoise { .. } => "trend_with_noise",
            GenKind::ConstantMarket { .. } => "constant_market",
            GenKind::SeparableRegime { .. } => "separable_regime",
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
            }
        };
        let non_negative = |what: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be non-negative, got {v}")))
            }
        };
        let finite = |what: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match *self {
            GenKind::GeometricRandomWalk {
                start,
                drift,
                volatility,
            } => {
                positive("start price", start)?;
                finite("drift", drift)?;
                non_negative("volatility", volatility)
            }
            GenKind::TrendWithNoise { start, slope, noise } => {
                positive("start price", start)?;
                finite("slope", slope)?;
                non_negative("noise", noise)
            }
            GenKind::ConstantMarket { price } => positive("price", price),
            GenKind::SeparableRegime {
                start,
                volatility,
                strength,
            } => {
                positive("start price", start)?;
                positive("volatility", volatility)?;
                if (0.0..=1.0).contains(&strength) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "strength must lie in [0, 1], got {strength}"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub days: usize,
    pub seed: u64,
    pub start_date: NaiveDate,
    pub market: String,
}

impl GenSpec {
    pub fn new(kind: GenKind, days: usize, seed: u64) -> Self {
        Self {
            kind,
            days,
            seed,
            start_date: NaiveDate::from_ymd_opt(2019, 4, 1).expect("valid date"),
            market: String::from("SYNTH"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.days < MIN_DAYS {
            return Err(Error::InvalidParameter(format!(
                "days must be at least {MIN_DAYS}, got {}",
                self.days
            )));
        }
        self.kind.validate()
    }
}

/// A generated series and, for the separable regime, the open-vs-open label
/// the generator planted for each day except the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub series: OhlcSeries,
    pub planted: Option<Vec<u8>>,
}

fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// A bar around `open` and `close` whose wicks extend by half-normal
/// multiples of `wick`.
fn bar(date: NaiveDate, open: f64, close: f64, wick: f64, rng: &mut ChaCha8Rng) -> Result<OhlcBar> {
    let up = libm::fabs(normal(rng)) * wick;
    let down = libm::fabs(normal(rng)) * wick;
    let high = open.max(close) * libm::exp(up);
    let low = open.min(close) * libm::exp(-down);
    OhlcBar::new(date, open, high, low, close)
}

pub fn generate(spec: &GenSpec) -> Result<OhlcSeries> {
    generate_with_labels(spec).map(|g| g.series)
}

pub fn generate_with_labels(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dates = weekdays(spec.start_date, spec.days);
    let mut bars = Vec::with_capacity(spec.days);
    let mut planted = None;
    match spec.kind {
        GenKind::GeometricRandomWalk {
            start,
            drift,
            volatility,
        } => {
            let mut prev_close = start;
            for &date in &dates {
                let close =
                    prev_close * libm::exp(drift - 0.5 * volatility * volatility + volatility * normal(&mut rng));
                let open = prev_close * libm::exp(0.25 * volatility * normal(&mut rng));
                bars.push(bar(date, open, close, 0.5 * volatility, &mut rng)?);
                prev_close = close;
            }
        }
        GenKind::TrendWithNoise { start, slope, noise } => {
            let base = libm::log(start);
            let mut prev_close = start;
            for (t, &date) in dates.iter().enumerate() {
                let close = libm::exp(base + slope * t as f64 + noise * normal(&mut rng));
                bars.push(bar(date, prev_close, close, 0.5 * noise, &mut rng)?);
                prev_close = close;
            }
        }
        GenKind::ConstantMarket { price } => {
            for &date in &dates {
                bars.push(OhlcBar::new(date, price, price, price, price)?);
            }
        }
        GenKind::SeparableRegime {
            start,
            volatility,
            strength,
        } => {
            // magnitudes are bounded away from zero so no move is a tie
            let step = |rng: &mut ChaCha8Rng| volatility * (0.1 + libm::fabs(normal(rng)));
            let mut labels = Vec::with_capacity(spec.days - 1);
            let mut open = start;
            for (t, &date) in dates.iter().enumerate() {
                let up_today = rng.random_bool(0.5);
                let intraday = step(&mut rng);
                let close = open * libm::exp(if up_today { intraday } else { -intraday });
                bars.push(bar(date, open, close, 0.5 * volatility, &mut rng)?);
                if t + 1 < spec.days {
                    let follow = rng.random::<f64>() < strength;
                    let up_next = if follow { up_today } else { rng.random_bool(0.5) };
                    let gap = step(&mut rng);
                    open *= libm::exp(if up_next { gap } else { -gap });
                    labels.push(u8::from(up_next));
                }
            }
            planted = Some(labels);
        }
    }
    Ok(Generated {
        series: OhlcSeries::new(spec.market.clone(), bars)?,
        planted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{make_labels, TaskKind};

    #[test]
    fn rejects_bad_specs() {
        let ok = GenKind::ConstantMarket { price: 10.0 };
        assert!(generate(&GenSpec::new(ok, 20, 0)).is_err());
        let bad = GenKind::GeometricRandomWalk {
            start: 100.0,
            drift: 0.0,
            volatility: -0.1,
        };
        assert!(generate(&GenSpec::new(bad, 100, 0)).is_err());
        let bad = GenKind::SeparableRegime {
            start: 100.0,
            volatility: 0.01,
            strength: 1.5,
        };
        assert!(generate(&GenSpec::new(bad, 100, 0)).is_err());
    }

    #[test]
    fn weekdays_skip_weekends() {
        let d = weekdays(NaiveDate::from_ymd_opt(2019, 4, 5).unwrap(), 3);
        assert_eq!(d[1], NaiveDate::from_ymd_opt(2019, 4, 8).unwrap());
        assert_eq!(d[2], NaiveDate::from_ymd_opt(2019, 4, 9).unwrap());
    }

    #[test]
    fn separable_planted_labels_match_and_follow_sign() {
        let kind = GenKind::SeparableRegime {
            start: 100.0,
            volatility: 0.01,
            strength: 1.0,
        };
        let g = generate_with_labels(&GenSpec::new(kind, 200, 3)).unwrap();
        let planted = g.planted.unwrap();
        let labels = make_labels(&g.series, TaskKind::OpVsOp, 0).unwrap();
        assert_eq!(labels.labels, planted);
        for (b, &y) in g.series.bars().iter().zip(&planted) {
            assert_eq!(u8::from(b.close > b.open), y);
        }
    }
}
