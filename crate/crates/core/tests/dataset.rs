mod common;

use common::random_series;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trendcast_core::dataset::{build, rolling_predict, split, EvalMode};
use trendcast_core::features::FeatureSetMask;
use trendcast_core::indicators::IndicatorParams;
use trendcast_core::labeling::TaskKind;
use trendcast_core::learners::preset;

#[test]
fn table_two_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = IndicatorParams::default();
    for (days, points, train, test) in [(1256, 1236, 989, 247), (1237, 1217, 974, 243)] {
        let s = random_series(&mut rng, days, false);
        for task in TaskKind::ALL {
            let ds = build(&s, &p, task, &FeatureSetMask::ALL).unwrap();
            assert_eq!(ds.n_points(), points);
            let sp = split(ds.n_points(), 0.8).unwrap();
            assert_eq!((sp.n_train, sp.n_test()), (train, test));
        }
    }
    let s = random_series(&mut rng, 21, false);
    assert_eq!(build(&s, &p, TaskKind::OpVsOp, &FeatureSetMask::INT).unwrap().n_points(), 1);
}

#[test]
fn binding_aligns_rows_with_label_days() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = random_series(&mut rng, 60, true);
    let ds = build(&s, &IndicatorParams::default(), TaskKind::OpVsClose, &FeatureSetMask::INT).unwrap();
    for (i, date) in ds.matrix.dates().iter().enumerate() {
        let t = 19 + i;
        assert_eq!(*date, s.bars()[t].date);
        assert_eq!(ds.matrix.row(i)[0], s.bars()[t].open);
        let y = u8::from(s.bars()[t + 1].open > s.bars()[t].close);
        assert_eq!(ds.y()[i], y);
    }
}

#[test]
fn predictions_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = random_series(&mut rng, 120, false);
    let ds = build(&s, &IndicatorParams::default(), TaskKind::OpVsOp, &FeatureSetMask::ALL).unwrap();
    let sp = split(ds.n_points(), 0.8).unwrap();
    for name in ["dt", "knn", "gnb", "logreg"] {
        let spec = preset(name).unwrap().with_seed(9);
        for mode in [EvalMode::StaticSplit, EvalMode::RollingOneStep { refit_every: 5, freeze_window: false }] {
            let a = rolling_predict(&ds, &sp, &spec, mode).unwrap();
            let b = rolling_predict(&ds, &sp, &spec, mode).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), sp.n_test());
        }
    }
}
