#![allow(dead_code)]

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trendcast_core::ohlc::{OhlcBar, OhlcSeries};

pub fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 4, 1).unwrap()
}

/// Random valid bars; with `ties` some opens repeat the previous open or
/// land exactly on a reference price.
pub fn random_series(rng: &mut ChaCha8Rng, len: usize, ties: bool) -> OhlcSeries {
    let mut bars = Vec::with_capacity(len);
    let mut level: f64 = rng.random_range(20.0..2000.0);
    let mut prev: Option<OhlcBar> = None;
    for t in 0..len {
        level *= (rng.random_range(-0.03..0.03_f64)).exp();
        let mut open = level * (rng.random_range(-0.01..0.01_f64)).exp();
        let close = level * (rng.random_range(-0.02..0.02_f64)).exp();
        if ties && t > 0 && rng.random_bool(0.15) {
            let p = prev.unwrap();
            open = match rng.random_range(0..4) {
                0 => p.open,
                1 => p.high,
                2 => p.low,
                _ => p.close,
            };
        }
        let high = open.max(close) * (rng.random_range(0.0..0.015_f64)).exp();
        let low = open.min(close) * (-rng.random_range(0.0..0.015_f64)).exp();
        let bar = OhlcBar::new(day0() + Days::new(t as u64), open, high, low, close).unwrap();
        prev = Some(bar);
        bars.push(bar);
    }
    OhlcSeries::new("RAND", bars).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() <= 1e-300
}
