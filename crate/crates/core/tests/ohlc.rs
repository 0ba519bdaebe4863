mod common;

use common::random_series;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trendcast_core::ohlc::{volatility, OhlcBar, OhlcSeries, PriceField};

fn closes_series(closes: &[f64]) -> OhlcSeries {
    let bars = closes
        .iter()
        .enumerate()
        .map(|(i, &c)| OhlcBar::new(common::day0() + chrono::Days::new(i as u64), c, c, c, c).unwrap())
        .collect();
    OhlcSeries::new("V", bars).unwrap()
}

#[test]
fn appendix_formulas_by_hand() {
    let e = std::f64::consts::E;
    let v = volatility(&closes_series(&[100.0, 100.0 * e, 100.0]), PriceField::Close, 252).unwrap();
    assert!((v.log_returns[0] - 1.0).abs() < 1e-14 && (v.log_returns[1] + 1.0).abs() < 1e-14);
    assert!(v.mean_return.abs() < 1e-14);
    assert!((v.variance - 2.0).abs() < 1e-13);
    assert!((v.daily_volatility - 2f64.sqrt()).abs() < 1e-13);
    assert!((v.periodized_volatility - v.daily_volatility * 252f64.sqrt()).abs() < 1e-12);
}

#[test]
fn geometric_series_has_zero_volatility() {
    let closes: Vec<f64> = (0..50).map(|t| 100.0 * 1.01f64.powi(t)).collect();
    let v = volatility(&closes_series(&closes), PriceField::Close, 252).unwrap();
    assert!(v.variance < 1e-20 && v.daily_volatility < 1e-10);
}

proptest! {
    #[test]
    fn volatility_is_scale_free(seed in any::<u64>(), c in 0.001..1000.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_series(&mut rng, 50, false);
        for field in PriceField::ALL {
            let a = volatility(&s, field, 21).unwrap();
            let b = volatility(&s.scaled(c).unwrap(), field, 21).unwrap();
            for (x, y) in a.log_returns.iter().zip(&b.log_returns) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert!((a.daily_volatility - b.daily_volatility).abs() < 1e-12);
        }
    }
}
