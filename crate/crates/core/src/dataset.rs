//! Feature/label binding, the chronological train/test split and
//! static or one-step-ahead rolling evaluation.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{assemble, select, FeatureMatrix, FeatureSetMask};
use crate::indicators::IndicatorParams;
use crate::labeling::{make_labels, LabelVector, TaskKind};
use crate::learners::{fit, ClassifierSpec, TrainedModel};
use crate::ohlc::OhlcSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub market: String,
    pub task: TaskKind,
    pub matrix: FeatureMatrix,
    pub labels: LabelVector,
}

impl LabeledDataset {
    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    pub fn y(&self) -> &[u8] {
        &self.labels.labels
    }
}

/// Aligns a feature matrix with labels. A matrix with exactly one more row
/// than there are labels loses its last (unlabelable) row.
pub fn bind(matrix: FeatureMatrix, labels: LabelVector, market: &str) -> Result<LabeledDataset> {
    let n = labels.len();
    let matrix = if matrix.n_rows() == n + 1 {
        matrix.slice_rows(0..n)
    } else if matrix.n_rows() == n {
        matrix
    } else {
        return Err(Error::LengthMismatch {
            what: "feature rows vs labels",
            left: matrix.n_rows(),
            right: n,
        });
    };
    if n == 0 {
        return Err(Error::Empty("dataset has no labeled points"));
    }
    Ok(LabeledDataset {
        market: market.into(),
        task: labels.task,
        matrix,
        labels,
    })
}

/// Runs the feature and label stages on `series` and binds the result.
pub fn build(
    series: &OhlcSeries,
    params: &IndicatorParams,
    task: TaskKind,
    mask: &FeatureSetMask,
) -> Result<LabeledDataset> {
    let rows = assemble(series, params)?;
    let matrix = select(&rows, mask)?;
    let labels = make_labels(series, task, params.first_defined_index())?;
    bind(matrix, labels, series.market())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub n_points: usize,
    pub n_train: usize,
}

impl Split {
    pub fn n_test(&self) -> usize {
        self.n_points - self.n_train
    }

    pub fn train(&self) -> Range<usize> {
        0..self.n_train
    }

    pub fn test(&self) -> Range<usize> {
        self.n_train..self.n_points
    }
}

/// Chronological split with `ceil(ratio * n_points)` training points.
pub fn split(n_points: usize, ratio: f64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    // guard against 0.8 * 1236 landing a hair above an integer
    let raw = ratio * n_points as f64;
    let rounded = libm::round(raw);
    let n_train = if libm::fabs(raw - rounded) < 1e-9 {
        rounded as usize
    } else {
        libm::ceil(raw) as usize
    };
    if n_train == 0 || n_train >= n_points {
        return Err(Error::InvalidParameter(format!(
            "ratio {ratio} on {n_points} points leaves an empty train or test set"
        )));
    }
    Ok(Split { n_points, n_train })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EvalMode {
    #[default]
    StaticSplit,
    /// Test point `i` is predicted by a model fitted on points before `i`.
    /// The window expands from the dataset start, or slides with the train
    /// length when `freeze_window` is set. A fit is reused for
    /// `refit_every` consecutive test points.
    RollingOneStep {
        refit_every: usize,
        freeze_window: bool,
    },
}

impl EvalMode {
    pub fn rolling() -> Self {
        EvalMode::RollingOneStep {
            refit_every: 1,
            freeze_window: false,
        }
    }
}

fn fit_window(
    ds: &LabeledDataset,
    spec: &ClassifierSpec,
    window: Range<usize>,
    index: usize,
) -> Result<TrainedModel> {
    let x = ds.matrix.slice_rows(window.clone());
    fit(spec, &x, &ds.y()[window]).map_err(|e| Error::WindowFit {
        index,
        source: Box::new(e),
    })
}

/// Predictions for every test point of `split`, in order.
pub fn rolling_predict(
    ds: &LabeledDataset,
    split: &Split,
    spec: &ClassifierSpec,
    mode: EvalMode,
) -> Result<Vec<u8>> {
    if split.n_points != ds.n_points() {
        return Err(Error::LengthMismatch {
            what: "split size vs dataset",
            left: split.n_points,
            right: ds.n_points(),
        });
    }
    match mode {
        EvalMode::StaticSplit => {
            let model = fit_window(ds, spec, split.train(), split.n_train)?;
            model.predict(&ds.matrix.slice_rows(split.test()))
        }
        EvalMode::RollingOneStep {
            refit_every,
            freeze_window,
        } => {
            if refit_every == 0 {
                return Err(Error::InvalidParameter("refit_every must be positive".into()));
            }
            let mut out = Vec::with_capacity(split.n_test());
            let mut model = None;
            for (k, i) in split.test().enumerate() {
                if k % refit_every == 0 {
                    let start = if freeze_window { i - split.n_train } else { 0 };
                    model = Some(fit_window(ds, spec, start..i, i)?);
                }
                let m = model.as_ref().expect("fitted on the first test point");
                out.extend(m.predict(&ds.matrix.slice_rows(i..i + 1))?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{preset, ClassifierSpec, Family};
    use alloc::string::ToString;
    use alloc::vec;

    fn toy(n: usize, y: Vec<u8>) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let m = FeatureMatrix::from_rows(vec!["a".to_string(), "b".to_string()], &rows).unwrap();
        bind(
            m,
            LabelVector {
                task: TaskKind::OpVsOp,
                labels: y,
            },
            "toy",
        )
        .unwrap()
    }

    #[test]
    fn split_counts() {
        assert_eq!(split(1236, 0.8).unwrap().n_train, 989);
        assert_eq!(split(1236, 0.8).unwrap().n_test(), 247);
        let s = split(1217, 0.8).unwrap();
        assert_eq!((s.n_train, s.n_test()), (974, 243));
        let s = split(10, 0.8).unwrap();
        assert_eq!((s.n_train, s.n_test()), (8, 2));
        assert!(split(1, 0.8).is_err());
        assert!(split(10, 1.0).is_err());
        assert!(split(10, 0.0).is_err());
        assert!(split(2, 0.99).is_err());
    }

    #[test]
    fn bind_drops_trailing_row() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let m = FeatureMatrix::from_rows(vec!["a".to_string()], &rows).unwrap();
        let labels = LabelVector {
            task: TaskKind::OpVsOp,
            labels: vec![0, 1, 0],
        };
        let ds = bind(m.clone(), labels.clone(), "x").unwrap();
        assert_eq!(ds.n_points(), 3);
        assert_eq!(ds.matrix.n_rows(), 3);
        let short = LabelVector {
            task: TaskKind::OpVsOp,
            labels: vec![0],
        };
        assert!(matches!(bind(m, short, "x"), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn static_constant_train_predicts_constant() {
        let ds = toy(10, vec![1, 1, 1, 1, 1, 1, 1, 1, 0, 0]);
        let s = split(10, 0.8).unwrap();
        for name in ["dt", "knn"] {
            let p = rolling_predict(&ds, &s, &preset(name).unwrap(), EvalMode::StaticSplit).unwrap();
            assert_eq!(p, vec![1, 1]);
        }
    }

    #[test]
    fn rolling_refit_window_grows() {
        // kNN with k = 6 votes over the whole window, so the prediction at
        // test[1] reveals that its window includes test[0]
        let ds = toy(7, vec![1, 1, 1, 0, 0, 0, 0]);
        let s = split(7, 0.7).unwrap();
        assert_eq!((s.n_train, s.n_test()), (5, 2));
        let spec = ClassifierSpec::new(Family::KNearest)
            .with_param("k", crate::learners::ParamValue::Int(6));
        let p = rolling_predict(&ds, &s, &spec, EvalMode::rolling()).unwrap();
        // window of 5: 3 ones of 5 -> 1; window of 6: 3 of 6 -> 0.5 -> 1
        assert_eq!(p[0], 1);
        let ds = toy(7, vec![1, 1, 0, 0, 0, 1, 0]);
        let p = rolling_predict(&ds, &s, &spec, EvalMode::rolling()).unwrap();
        // window of 5 holds 2 ones (0.4 -> 0); window of 6 holds 3 (0.5 -> 1)
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn frozen_rolling_matches_static_with_single_fit() {
        let y = vec![0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 0, 0];
        let ds = toy(12, y);
        let s = split(12, 0.75).unwrap();
        let spec = preset("dt").unwrap();
        let a = rolling_predict(&ds, &s, &spec, EvalMode::StaticSplit).unwrap();
        let b = rolling_predict(
            &ds,
            &s,
            &spec,
            EvalMode::RollingOneStep {
                refit_every: s.n_test(),
                freeze_window: true,
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn window_fit_failure_reports_index() {
        let ds = toy(6, vec![0, 1, 0, 1, 0, 1]);
        let s = split(6, 0.5).unwrap();
        let spec = ClassifierSpec::new(Family::KNearest)
            .with_param("k", crate::learners::ParamValue::Int(0));
        match rolling_predict(&ds, &s, &spec, EvalMode::rolling()) {
            Err(Error::WindowFit { index, .. }) => assert_eq!(index, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
