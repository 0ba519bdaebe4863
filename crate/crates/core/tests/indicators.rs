mod common;

use common::{random_series, rel_close};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trendcast_core::indicators::{
    atr, bollinger, donchian, ema, keltner, sma, true_range, IndicatorParams,
};
use trendcast_core::ohlc::OhlcSeries;

fn naive_tr(s: &OhlcSeries, t: usize) -> f64 {
    let b = s.bars()[t];
    let mut candidates = vec![b.high - b.low];
    if t > 0 {
        let pc = s.bars()[t - 1].close;
        candidates.push((b.high - pc).abs());
        candidates.push((b.low - pc).abs());
    }
    candidates.into_iter().fold(f64::MIN, f64::max)
}

/// EMA in closed form: weights on the seed and on each later close.
fn naive_ema(x: &[f64], n: usize, t: usize) -> f64 {
    let a = 2.0 / (n as f64 + 1.0);
    let seed = x[..n].iter().sum::<f64>() / n as f64;
    let steps = t - (n - 1);
    let mut v = (1.0 - a).powi(steps as i32) * seed;
    for k in n..=t {
        v += a * (1.0 - a).powi((t - k) as i32) * x[k];
    }
    v
}

fn check_series(s: &OhlcSeries, n: usize) {
    let p = IndicatorParams::with_window(n);
    let dc = donchian(s, n).unwrap();
    let bb = bollinger(s, &p).unwrap();
    let kc = keltner(s, &p).unwrap();
    let closes = s.closes();
    for t in 0..s.len() {
        if t + 1 < n {
            assert!(dc[t].is_none() && bb[t].is_none() && kc[t].is_none());
            continue;
        }
        let w = &s.bars()[t + 1 - n..=t];
        let hi = w.iter().map(|b| b.high).fold(f64::MIN, f64::max);
        let lo = w.iter().map(|b| b.low).fold(f64::MAX, f64::min);
        let d = dc[t].unwrap();
        assert!(rel_close(d.upper, hi, 1e-9) && rel_close(d.lower, lo, 1e-9));
        assert!(rel_close(d.middle, (hi + lo) / 2.0, 1e-9));

        let wc = &closes[t + 1 - n..=t];
        let mean = wc.iter().sum::<f64>() / n as f64;
        let sd = (wc.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n as f64).sqrt();
        let b = bb[t].unwrap();
        assert!(rel_close(b.middle, mean, 1e-9));
        assert!(rel_close(b.upper, mean + 2.0 * sd, 1e-9));
        assert!(rel_close(b.lower, mean - 2.0 * sd, 1e-9));

        let a = (t + 1 - n..=t).map(|i| naive_tr(s, i)).sum::<f64>() / n as f64;
        let e = naive_ema(&closes, n, t);
        let k = kc[t].unwrap();
        assert!(rel_close(k.middle, e, 1e-9), "ema {} vs {}", k.middle, e);
        assert!(rel_close(k.upper, e + 2.0 * a, 1e-9));
        assert!(rel_close(k.lower, e - 2.0 * a, 1e-9));

        for band in [d, b, k] {
            assert!(band.lower <= band.middle && band.middle <= band.upper);
        }
    }
}

#[test]
fn channels_match_window_scans_on_seeded_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d1c);
    for _ in 0..200 {
        let len = rng.random_range(100..=500);
        let n = [20, rng.random_range(1..=30)][rng.random_range(0..2)];
        let s = random_series(&mut rng, len, false);
        check_series(&s, n);
    }
}

#[test]
fn true_range_and_atr_match_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_series(&mut rng, 300, true);
    let tr = true_range(&s);
    for (t, v) in tr.iter().enumerate() {
        assert_eq!(*v, naive_tr(&s, t));
    }
    let a = atr(&s, 14).unwrap();
    for t in 13..300 {
        let m = tr[t - 13..=t].iter().sum::<f64>() / 14.0;
        assert!(rel_close(a[t].unwrap(), m, 1e-9));
    }
}

#[test]
fn literal_bollinger_uses_per_day_centers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = random_series(&mut rng, 120, false);
    let n = 20;
    let p = IndicatorParams {
        bollinger_rolling_center: true,
        ..IndicatorParams::with_window(n)
    };
    let bb = bollinger(&s, &p).unwrap();
    let closes = s.closes();
    let m = sma(&closes, n).unwrap();
    for t in 0..120 {
        if t < 2 * n - 2 {
            assert!(bb[t].is_none());
            continue;
        }
        let ss: f64 = (t + 1 - n..=t).map(|i| (closes[i] - m[i].unwrap()).powi(2)).sum();
        let sd = (ss / n as f64).sqrt();
        assert!(rel_close(bb[t].unwrap().upper, m[t].unwrap() + 2.0 * sd, 1e-9));
    }
}

#[test]
fn constant_bars_collapse_every_channel() {
    use trendcast_core::ohlc::OhlcBar;
    let bars = (0..30)
        .map(|i| {
            OhlcBar::new(common::day0() + chrono::Days::new(i), 50.0, 50.0, 50.0, 50.0).unwrap()
        })
        .collect();
    let s = OhlcSeries::new("C", bars).unwrap();
    let p = IndicatorParams::default();
    for chan in [donchian(&s, 20).unwrap(), bollinger(&s, &p).unwrap(), keltner(&s, &p).unwrap()] {
        for b in chan.into_iter().flatten() {
            assert!(rel_close(b.upper, 50.0, 1e-12) && rel_close(b.lower, 50.0, 1e-12));
            assert!(rel_close(b.middle, 50.0, 1e-12));
        }
    }
    let e = ema(&s.closes(), 20).unwrap();
    assert!(e.into_iter().flatten().all(|v| rel_close(v, 50.0, 1e-12)));
}

proptest! {
    #[test]
    fn donchian_monotone_under_raised_high(seed in any::<u64>(), bump in 0.0..5.0f64, pick in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_series(&mut rng, 40, false);
        let n = 20;
        let before = donchian(&s, n).unwrap();
        let mut bars = s.bars().to_vec();
        let i = 20 + pick;
        bars[i].high += bump;
        bars[i].low = (bars[i].low - bump).max(bars[i].low * 0.5);
        let raised = OhlcSeries::new("R", bars).unwrap();
        let after = donchian(&raised, n).unwrap();
        for t in i..(i + n).min(40) {
            let (b, a) = (before[t].unwrap(), after[t].unwrap());
            prop_assert!(a.upper >= b.upper);
            prop_assert!(a.lower <= b.lower);
        }
    }

    #[test]
    fn bands_are_ordered(seed in any::<u64>(), n in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_series(&mut rng, 60, true);
        let p = IndicatorParams::with_window(n);
        for chan in [donchian(&s, n).unwrap(), bollinger(&s, &p).unwrap(), keltner(&s, &p).unwrap()] {
            for b in chan.into_iter().flatten() {
                prop_assert!(b.lower <= b.middle && b.middle <= b.upper);
            }
        }
    }
}
