//! Interventional Shapley values.
//!
//! The value of a coalition `S` for a row `x` is the mean model score over a
//! background sample, with each background row's features on `S` replaced
//! by `x`'s. Exact mode enumerates all `2^d` coalitions; sampled mode
//! averages marginal contributions along random feature permutations.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::learners::{Scorer, TrainedModel};

/// Largest feature count accepted by exact enumeration.
pub const MAX_EXACT_FEATURES: usize = 20;

/// Default cap on background rows.
pub const DEFAULT_BACKGROUND: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ShapleyMode {
    Exact,
    Sampled { n_permutations: usize, seed: u64 },
}

impl ShapleyMode {
    pub fn name(&self) -> &'static str {
        match self {
            ShapleyMode::Exact => "exact",
            ShapleyMode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub date: NaiveDate,
    pub phi: Vec<f64>,
    /// Value of the empty coalition.
    pub base_value: f64,
    /// Model score on the unmodified row.
    pub model_output: f64,
}

impl AttributionRow {
    /// `sum(phi) - (model_output - base_value)`.
    pub fn efficiency_residual(&self) -> f64 {
        self.phi.iter().sum::<f64>() - (self.model_output - self.base_value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyReport {
    pub feature_names: Vec<String>,
    /// Mean of `|phi|` per feature over the attributed rows.
    pub global_importance: Vec<f64>,
    pub mode: ShapleyMode,
    pub background_size: usize,
    pub rows: Vec<AttributionRow>,
}

impl ShapleyReport {
    /// Aggregates per-row attributions, summing in row order.
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<AttributionRow>,
        mode: ShapleyMode,
        background_size: usize,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("no rows to attribute"));
        }
        let mut global_importance = vec![0.0; feature_names.len()];
        for r in &rows {
            for (g, p) in global_importance.iter_mut().zip(&r.phi) {
                *g += libm::fabs(*p);
            }
        }
        for g in &mut global_importance {
            *g /= rows.len() as f64;
        }
        Ok(Self {
            feature_names,
            global_importance,
            mode,
            background_size,
            rows,
        })
    }

    /// Feature indices from most to least important; ties keep column order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.feature_names.len()).collect();
        idx.sort_by(|&a, &b| {
            self.global_importance[b]
                .total_cmp(&self.global_importance[a])
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Up to `max_rows` distinct rows of `matrix`, chosen by `seed` and kept in
/// chronological order.
pub fn sample_rows(n_rows: usize, max_rows: usize, seed: u64) -> Vec<usize> {
    if n_rows <= max_rows {
        return (0..n_rows).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n_rows, max_rows).into_vec();
    idx.sort_unstable();
    idx
}

/// Seeded background sample of at most `max_rows` rows.
pub fn sample_background(matrix: &FeatureMatrix, max_rows: usize, seed: u64) -> FeatureMatrix {
    matrix.take_rows(&sample_rows(matrix.n_rows(), max_rows, seed))
}

fn check_inputs<S: Scorer + ?Sized>(
    model: &S,
    row: &[f64],
    background: &FeatureMatrix,
) -> Result<()> {
    let d = model.n_features();
    if row.len() != d {
        return Err(Error::LengthMismatch {
            what: "row width vs model features",
            left: row.len(),
            right: d,
        });
    }
    if background.n_cols() != d {
        return Err(Error::LengthMismatch {
            what: "background width vs model features",
            left: background.n_cols(),
            right: d,
        });
    }
    if background.n_rows() == 0 {
        return Err(Error::Empty("background sample"));
    }
    if d == 0 {
        return Err(Error::Empty("model has no features"));
    }
    Ok(())
}

/// Coalition value for the members of `mask`, averaged over the background.
fn coalition_value<S: Scorer + ?Sized>(
    model: &S,
    row: &[f64],
    background: &FeatureMatrix,
    in_coalition: impl Fn(usize) -> bool,
    buf: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for b in background.rows() {
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = if in_coalition(j) { row[j] } else { b[j] };
        }
        total += model.score(buf);
    }
    total / background.n_rows() as f64
}

/// Exact Shapley values by enumerating every coalition.
pub fn shapley_exact<S: Scorer + ?Sized>(
    model: &S,
    row: &[f64],
    date: NaiveDate,
    background: &FeatureMatrix,
) -> Result<AttributionRow> {
    check_inputs(model, row, background)?;
    let d = model.n_features();
    if d > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures {
            features: d,
            max: MAX_EXACT_FEATURES,
        });
    }
    let n_masks = 1usize << d;
    let mut buf = vec![0.0; d];
    let values: Vec<f64> = (0..n_masks)
        .map(|mask| coalition_value(model, row, background, |j| (mask >> j) & 1 == 1, &mut buf))
        .collect();

    // weight[s] = s! (d - s - 1)! / d!
    let mut weight = vec![0.0; d];
    for (s, w) in weight.iter_mut().enumerate() {
        let mut v = 1.0 / d as f64;
        // 1 / (d * C(d-1, s))
        for k in 0..s {
            v *= (k + 1) as f64 / (d - 1 - k) as f64;
        }
        *w = v;
    }
    let mut phi = vec![0.0; d];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in (0..n_masks).filter(|m| m & bit == 0) {
            let s = mask.count_ones() as usize;
            acc += weight[s] * (values[mask | bit] - values[mask]);
        }
        *p = acc;
    }
    Ok(AttributionRow {
        date,
        phi,
        base_value: values[0],
        model_output: model.score(row),
    })
}

/// Monte Carlo Shapley values over `n_permutations` random orderings.
pub fn shapley_sampled<S: Scorer + ?Sized>(
    model: &S,
    row: &[f64],
    date: NaiveDate,
    background: &FeatureMatrix,
    n_permutations: usize,
    seed: u64,
) -> Result<AttributionRow> {
    check_inputs(model, row, background)?;
    if n_permutations == 0 {
        return Err(Error::InvalidParameter("n_permutations must be positive".into()));
    }
    let d = model.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..d).collect();
    let mut member = vec![false; d];
    let mut buf = vec![0.0; d];
    let mut phi = vec![0.0; d];
    let base = coalition_value(model, row, background, |_| false, &mut buf);
    for _ in 0..n_permutations {
        order.shuffle(&mut rng);
        member.iter_mut().for_each(|m| *m = false);
        let mut prev = base;
        for &j in &order {
            member[j] = true;
            let cur = coalition_value(model, row, background, |k| member[k], &mut buf);
            phi[j] += cur - prev;
            prev = cur;
        }
    }
    for p in &mut phi {
        *p /= n_permutations as f64;
    }
    Ok(AttributionRow {
        date,
        phi,
        base_value: base,
        model_output: model.score(row),
    })
}

/// Attribution of one row under `mode`.
pub fn attribute<S: Scorer + ?Sized>(
    model: &S,
    row: &[f64],
    date: NaiveDate,
    background: &FeatureMatrix,
    mode: ShapleyMode,
) -> Result<AttributionRow> {
    match mode {
        ShapleyMode::Exact => shapley_exact(model, row, date, background),
        ShapleyMode::Sampled {
            n_permutations,
            seed,
        } => shapley_sampled(model, row, date, background, n_permutations, seed),
    }
}

/// Mean absolute Shapley value per feature over every row of `rows`.
pub fn global_importance<S: Scorer + ?Sized>(
    model: &S,
    rows: &FeatureMatrix,
    background: &FeatureMatrix,
    mode: ShapleyMode,
) -> Result<ShapleyReport> {
    if rows.n_rows() == 0 {
        return Err(Error::Empty("no rows to attribute"));
    }
    let attributed = rows
        .rows()
        .zip(rows.dates())
        .map(|(r, &date)| attribute(model, r, date, background, mode))
        .collect::<Result<Vec<_>>>()?;
    ShapleyReport::from_rows(rows.columns().to_vec(), attributed, mode, background.n_rows())
}

/// Checks that `matrix` carries the columns `model` was trained on.
pub fn check_model_columns(model: &TrainedModel, matrix: &FeatureMatrix) -> Result<()> {
    if model.feature_names.as_slice() != matrix.columns() {
        return Err(Error::ColumnMismatch {
            expected: model.feature_names.clone(),
            got: matrix.columns().to_vec(),
        });
    }
    if let Some((row, col)) = matrix.find_non_finite() {
        return Err(Error::NonFinite {
            what: "attribution input",
            row,
            col,
        });
    }
    Ok(())
}

/// [`global_importance`] for a trained model, after checking columns.
pub fn explain_model(
    model: &TrainedModel,
    rows: &FeatureMatrix,
    background: &FeatureMatrix,
    mode: ShapleyMode,
) -> Result<ShapleyReport> {
    check_model_columns(model, rows)?;
    check_model_columns(model, background).map_err(|e| match e {
        Error::ColumnMismatch { .. } => e,
        other => Error::InvalidParameter(format!("background: {other}")),
    })?;
    global_importance(model, rows, background, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("x{i}")).collect()
    }

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()
    }

    #[test]
    fn linear_closed_form() {
        let w = [2.0, -1.0, 0.5];
        let model = (3usize, move |x: &[f64]| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        let bg = FeatureMatrix::from_rows(
            names(3),
            &[vec![1.0, 2.0, 3.0], vec![3.0, 0.0, -1.0]],
        )
        .unwrap();
        let mu = [2.0, 1.0, 1.0];
        let x = [0.5, 4.0, -2.0];
        let a = shapley_exact(&model, &x, day(), &bg).unwrap();
        for i in 0..3 {
            assert!((a.phi[i] - w[i] * (x[i] - mu[i])).abs() < 1e-12);
        }
        assert!(a.efficiency_residual().abs() < 1e-12);
    }

    #[test]
    fn constant_model_gets_zero() {
        let model = (4usize, |_: &[f64]| 0.7);
        let bg = FeatureMatrix::from_rows(names(4), &[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let a = shapley_exact(&model, &[0.0; 4], day(), &bg).unwrap();
        assert!(a.phi.iter().all(|&p| p == 0.0));
        let s = shapley_sampled(&model, &[0.0; 4], day(), &bg, 3, 1).unwrap();
        assert!(s.phi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn exact_rejects_wide_input() {
        let d = MAX_EXACT_FEATURES + 1;
        let model = (d, |_: &[f64]| 0.0);
        let bg = FeatureMatrix::from_rows(names(d), &[vec![0.0; d]]).unwrap();
        assert!(matches!(
            shapley_exact(&model, &vec![0.0; d], day(), &bg),
            Err(Error::TooManyFeatures { .. })
        ));
    }

    #[test]
    fn single_row_report_is_abs_phi() {
        let model = (2usize, |x: &[f64]| x[0] - 3.0 * x[1]);
        let bg = FeatureMatrix::from_rows(names(2), &[vec![0.0, 0.0]]).unwrap();
        let rows = FeatureMatrix::from_rows(names(2), &[vec![1.0, 1.0]]).unwrap();
        let r = global_importance(&model, &rows, &bg, ShapleyMode::Exact).unwrap();
        assert!((r.global_importance[0] - 1.0).abs() < 1e-12);
        assert!((r.global_importance[1] - 3.0).abs() < 1e-12);
        assert_eq!(r.ranking(), vec![1, 0]);
        assert_eq!(r.feature_names[0], "x0".to_string());
    }

    #[test]
    fn sample_rows_is_sorted_and_bounded() {
        let idx = sample_rows(1000, 128, 9);
        assert_eq!(idx.len(), 128);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(idx, sample_rows(1000, 128, 9));
        assert_eq!(sample_rows(5, 128, 9), vec![0, 1, 2, 3, 4]);
    }
}
