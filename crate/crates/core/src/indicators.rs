//! Moving averages, true range and the three channel families.
//!
//! Every series-valued output has the same length as its input. Positions
//! where the look-back window is not yet full are `None`, never zero.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ohlc::OhlcSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Donchian,
    Bollinger,
    Keltner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandTriple {
    pub upper: f64,
    pub middle: f64,
    pub lower: f64,
    pub kind: ChannelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorParams {
    pub window_n: usize,
    pub bollinger_k: f64,
    pub keltner_k: f64,
    /// Center each squared deviation on the moving average at that day
    /// instead of the average at the band's own day.
    pub bollinger_rolling_center: bool,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        Self {
            window_n: 20,
            bollinger_k: 2.0,
            keltner_k: 2.0,
            bollinger_rolling_center: false,
        }
    }
}

impl IndicatorParams {
    pub fn with_window(window_n: usize) -> Self {
        Self {
            window_n,
            ..Self::default()
        }
    }

    /// EMA smoothing factor `2 / (n + 1)`.
    pub fn ema_alpha(&self) -> f64 {
        2.0 / (self.window_n as f64 + 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_n == 0 {
            return Err(Error::InvalidParameter("window_n must be positive".into()));
        }
        for (name, k) in [("bollinger_k", self.bollinger_k), ("keltner_k", self.keltner_k)] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a non-negative finite number, got {k}"
                )));
            }
        }
        Ok(())
    }

    /// Index of the first day on which every channel is defined.
    pub fn first_defined_index(&self) -> usize {
        if self.bollinger_rolling_center {
            2 * self.window_n - 2
        } else {
            self.window_n - 1
        }
    }
}

fn check_window(len: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("window length must be positive".into()));
    }
    if len < n {
        return Err(Error::InputTooShort {
            required: n,
            available: len,
        });
    }
    Ok(())
}

/// Simple moving average over the trailing `n` values.
pub fn sma(values: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_window(values.len(), n)?;
    let mut out = vec![None; values.len()];
    let mut sum: f64 = values[..n - 1].iter().sum();
    for t in n - 1..values.len() {
        sum += values[t];
        out[t] = Some(sum / n as f64);
        sum -= values[t + 1 - n];
    }
    Ok(out)
}

/// Exponential moving average with `alpha = 2 / (n + 1)`, seeded at index
/// `n - 1` with the SMA of the first `n` values.
pub fn ema(values: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_window(values.len(), n)?;
    let alpha = 2.0 / (n as f64 + 1.0);
    let mut out = vec![None; values.len()];
    let mut prev = values[..n].iter().sum::<f64>() / n as f64;
    out[n - 1] = Some(prev);
    for t in n..values.len() {
        prev = alpha * values[t] + (1.0 - alpha) * prev;
        out[t] = Some(prev);
    }
    Ok(out)
}

/// `max(high - low, |high - prev_close|, |low - prev_close|)`; the first bar
/// has no previous close and uses `high - low`.
pub fn true_range(series: &OhlcSeries) -> Vec<f64> {
    let bars = series.bars();
    let mut out = Vec::with_capacity(bars.len());
    for (t, bar) in bars.iter().enumerate() {
        let range = bar.high - bar.low;
        if t == 0 {
            out.push(range);
        } else {
            let prev_close = bars[t - 1].close;
            out.push(
                range
                    .max((bar.high - prev_close).abs())
                    .max((bar.low - prev_close).abs()),
            );
        }
    }
    out
}

/// Average true range: trailing `n`-day mean of [`true_range`].
pub fn atr(series: &OhlcSeries, n: usize) -> Result<Vec<Option<f64>>> {
    sma(&true_range(series), n)
}

/// Highest high and lowest low over the trailing `n` days, middle at their
/// mean. Monotone deques keep this linear in the series length.
pub fn donchian(series: &OhlcSeries, n: usize) -> Result<Vec<Option<BandTriple>>> {
    let bars = series.bars();
    check_window(bars.len(), n)?;
    let mut out = vec![None; bars.len()];
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    for (t, bar) in bars.iter().enumerate() {
        while maxq.back().is_some_and(|&j| bars[j].high <= bar.high) {
            maxq.pop_back();
        }
        maxq.push_back(t);
        while minq.back().is_some_and(|&j| bars[j].low >= bar.low) {
            minq.pop_back();
        }
        minq.push_back(t);
        if t + 1 < n {
            continue;
        }
        let start = t + 1 - n;
        while maxq.front().is_some_and(|&j| j < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < start) {
            minq.pop_front();
        }
        let upper = bars[maxq[0]].high;
        let lower = bars[minq[0]].low;
        out[t] = Some(BandTriple {
            upper,
            middle: (upper + lower) / 2.0,
            lower,
            kind: ChannelKind::Donchian,
        });
    }
    Ok(out)
}

/// SMA of closes plus/minus `k` population standard deviations.
///
/// In the default mode deviations are taken from the SMA at day `t`. With
/// `bollinger_rolling_center` each close in the window is centered on the SMA
/// ending at its own day, so the band is undefined until `2n - 2`.
pub fn bollinger(series: &OhlcSeries, params: &IndicatorParams) -> Result<Vec<Option<BandTriple>>> {
    params.validate()?;
    let n = params.window_n;
    let closes = series.closes();
    let mean = sma(&closes, n)?;
    let mut out = vec![None; closes.len()];
    for t in n - 1..closes.len() {
        let middle = mean[t].expect("sma defined from n - 1");
        let mut ss = 0.0;
        let mut defined = true;
        for i in t + 1 - n..=t {
            let center = if params.bollinger_rolling_center {
                match mean[i] {
                    Some(m) => m,
                    None => {
                        defined = false;
                        break;
                    }
                }
            } else {
                middle
            };
            let dev = closes[i] - center;
            ss += dev * dev;
        }
        if !defined {
            continue;
        }
        let sigma = libm::sqrt(ss / n as f64);
        out[t] = Some(BandTriple {
            upper: middle + params.bollinger_k * sigma,
            middle,
            lower: middle - params.bollinger_k * sigma,
            kind: ChannelKind::Bollinger,
        });
    }
    Ok(out)
}

/// EMA of closes plus/minus `keltner_k` average true ranges.
pub fn keltner(series: &OhlcSeries, params: &IndicatorParams) -> Result<Vec<Option<BandTriple>>> {
    params.validate()?;
    let n = params.window_n;
    let middle = ema(&series.closes(), n)?;
    let range = atr(series, n)?;
    Ok(middle
        .iter()
        .zip(&range)
        .map(|(m, a)| match (m, a) {
            (Some(m), Some(a)) => Some(BandTriple {
                upper: m + params.keltner_k * a,
                middle: *m,
                lower: m - params.keltner_k * a,
                kind: ChannelKind::Keltner,
            }),
            _ => None,
        })
        .collect())
}
