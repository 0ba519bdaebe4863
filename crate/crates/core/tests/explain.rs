use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trendcast_core::dataset::{build, split};
use trendcast_core::explain::{
    explain_model, global_importance, sample_background, shapley_exact, shapley_sampled, ShapleyMode,
};
use trendcast_core::features::{FeatureMatrix, FeatureSetMask};
use trendcast_core::indicators::IndicatorParams;
use trendcast_core::labeling::TaskKind;
use trendcast_core::learners::{fit, preset, ClassifierSpec, Family, ParamValue};
use trendcast_core::synth::{generate, GenKind, GenSpec};

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("x{i}")).collect()
}

fn day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 6, 1).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    FeatureMatrix::from_rows(names(d), &rows).unwrap()
}

fn regime_dataset(strength: f64, days: usize) -> trendcast_core::dataset::LabeledDataset {
    let kind = GenKind::SeparableRegime { start: 1000.0, volatility: 0.01, strength };
    let s = generate(&GenSpec::new(kind, days, 21)).unwrap();
    build(&s, &IndicatorParams::default(), TaskKind::OpVsOp, &FeatureSetMask::INT_NOW).unwrap()
}

#[test]
fn efficiency_on_fitted_tree_and_logistic() {
    let ds = regime_dataset(0.7, 300);
    let sp = split(ds.n_points(), 0.8).unwrap();
    let train = ds.matrix.slice_rows(sp.train());
    let y = &ds.y()[sp.train()];
    let test = ds.matrix.slice_rows(sp.test());
    let bg = sample_background(&train, 32, 1);
    for spec in [preset("dt").unwrap(), preset("logreg").unwrap()] {
        let m = fit(&spec, &train, y).unwrap();
        let report = explain_model(&m, &test.slice_rows(0..15), &bg, ShapleyMode::Exact).unwrap();
        for r in &report.rows {
            assert!(r.efficiency_residual().abs() < 1e-6, "{}: {}", spec.label, r.efficiency_residual());
        }
    }
}

#[test]
fn unread_feature_gets_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| vec![rng.random_range(-1.0..1.0), 5.0, rng.random_range(-1.0..1.0)])
        .collect();
    let y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + r[2] > 0.0)).collect();
    let x = FeatureMatrix::from_rows(names(3), &rows).unwrap();
    let probe = {
        let mut p = rows[..10].to_vec();
        for r in &mut p {
            r[1] = rng.random_range(-10.0..10.0);
        }
        FeatureMatrix::from_rows(names(3), &p).unwrap()
    };
    for spec in [preset("dt").unwrap(), preset("xgb").unwrap()] {
        let m = fit(&spec, &x, &y).unwrap();
        let r = explain_model(&m, &probe, &x.slice_rows(0..20), ShapleyMode::Exact).unwrap();
        for row in &r.rows {
            assert!(row.phi[1].abs() < 1e-9, "{}: {}", spec.label, row.phi[1]);
        }
    }
}

#[test]
fn linear_scorer_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [1, 3, 7, 12] {
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let wc = w.clone();
        let model = (d, move |x: &[f64]| b + wc.iter().zip(x).map(|(a, v)| a * v).sum::<f64>());
        let bg = random_matrix(&mut rng, 17, d);
        let mu: Vec<f64> = (0..d).map(|j| bg.column(j).sum::<f64>() / 17.0).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = shapley_exact(&model, &x, day(), &bg).unwrap();
        for j in 0..d {
            assert!((a.phi[j] - w[j] * (x[j] - mu[j])).abs() < 1e-9);
        }
    }
}

#[test]
fn symmetric_pair_gets_equal_credit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = (4usize, |x: &[f64]| (x[0] * x[1] + x[2]).tanh() + 0.3 * x[3] * x[0] * x[1]);
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            let v = rng.random_range(-1.0..1.0);
            vec![v, v, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
        })
        .collect();
    let bg = FeatureMatrix::from_rows(names(4), &rows).unwrap();
    let x = [0.8, 0.8, -0.4, 1.3];
    let a = shapley_exact(&model, &x, day(), &bg).unwrap();
    assert!((a.phi[0] - a.phi[1]).abs() < 1e-6);
}

#[test]
fn sampled_converges_and_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let model = (3usize, |x: &[f64]| (x[0] * x[1]).sin() + x[2] * x[2] - x[0]);
    let bg = random_matrix(&mut rng, 10, 3);
    let x = [1.0, -0.5, 1.5];
    let exact = shapley_exact(&model, &x, day(), &bg).unwrap();
    let est = shapley_sampled(&model, &x, day(), &bg, 6000, 7).unwrap();
    for j in 0..3 {
        assert!((exact.phi[j] - est.phi[j]).abs() < 0.05);
    }
    let a = shapley_sampled(&model, &x, day(), &bg, 1, 99).unwrap();
    let b = shapley_sampled(&model, &x, day(), &bg, 1, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sampled_estimate_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = (4usize, |x: &[f64]| x[0] * x[1] - x[2].max(x[3]) + 0.5 * x[1] * x[3]);
    let bg = random_matrix(&mut rng, 8, 4);
    let x = [1.2, -0.7, 0.4, 1.9];
    let exact = shapley_exact(&model, &x, day(), &bg).unwrap();
    let runs: Vec<Vec<f64>> = (0..30)
        .map(|s| shapley_sampled(&model, &x, day(), &bg, 20, 1000 + s).unwrap().phi)
        .collect();
    for j in 0..4 {
        let vals: Vec<f64> = runs.iter().map(|r| r[j]).collect();
        let mean = vals.iter().sum::<f64>() / 30.0;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 29.0;
        let se = (var / 30.0).sqrt();
        assert!((mean - exact.phi[j]).abs() <= 3.0 * se + 1e-12, "feature {j}");
    }
}

#[test]
fn single_feature_tree_ranks_that_feature_first() {
    let ds = regime_dataset(1.0, 200);
    let spec = ClassifierSpec::new(Family::DecisionTree).with_param("max_depth", ParamValue::Int(1));
    let m = fit(&spec, &ds.matrix, ds.y()).unwrap();
    let report = explain_model(&m, &ds.matrix.slice_rows(0..40), &sample_background(&ds.matrix, 64, 2), ShapleyMode::Exact).unwrap();
    let order = report.ranking();
    assert_eq!(report.feature_names[order[0]], "r_cl");
    assert!(report.global_importance[order[0]] > report.global_importance[order[1]]);
}

#[test]
fn constant_columns_have_no_importance() {
    let rows = vec![vec![1.0, 2.0, 3.0]; 6];
    let x = FeatureMatrix::from_rows(names(3), &rows).unwrap();
    let model = (3usize, |v: &[f64]| v[0] * v[1] - v[2]);
    let r = global_importance(&model, &x, &x, ShapleyMode::Exact).unwrap();
    assert!(r.global_importance.iter().all(|&g| g == 0.0));
    assert_eq!(r.background_size, 6);
}

#[test]
fn mismatched_columns_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_matrix(&mut rng, 30, 2);
    let y: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
    let m = fit(&preset("gnb").unwrap(), &x, &y).unwrap();
    let other = random_matrix(&mut rng, 5, 3);
    assert!(explain_model(&m, &other, &x, ShapleyMode::Exact).is_err());
}
