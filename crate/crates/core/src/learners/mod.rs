//! Classifier families behind one fit/predict contract.
//!
//! Every family outputs a score in `[0, 1]` (the estimated probability of
//! label 1); the predicted label is 1 iff the score is at least 0.5.

pub mod boost;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod mlp;
pub mod naive_bayes;
pub mod params;
pub mod tree;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use params::{Hyperparams, ParamValue};

/// Names accepted by [`preset`], in report order.
pub const PRESET_NAMES: [&str; 8] = [
    "dt",
    "gnb",
    "knn",
    "logreg",
    "xgb",
    "mlp",
    "catboost",
    "extratrees",
];

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Borrowed row-major matrix.
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    pub data: &'a [f64],
    pub n_cols: usize,
}

impl<'a> DataView<'a> {
    pub fn new(data: &'a [f64], n_cols: usize) -> Self {
        assert!(n_cols > 0 && data.len().is_multiple_of(n_cols), "ragged data view");
        Self { data, n_cols }
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'a, f64> {
        self.data.chunks_exact(self.n_cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DecisionTree,
    ExtraTrees,
    GradientBoostedTrees,
    GaussianNb,
    KNearest,
    LogisticRegression,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::DecisionTree,
        Family::ExtraTrees,
        Family::GradientBoostedTrees,
        Family::GaussianNb,
        Family::KNearest,
        Family::LogisticRegression,
        Family::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::DecisionTree => "decision_tree",
            Family::ExtraTrees => "extra_trees",
            Family::GradientBoostedTrees => "gradient_boosted_trees",
            Family::GaussianNb => "gaussian_nb",
            Family::KNearest => "k_nearest",
            Family::LogisticRegression => "logistic_regression",
            Family::Mlp => "mlp",
        }
    }

    /// Whether z-scoring is on by default for this family.
    pub fn standardizes_by_default(self) -> bool {
        matches!(
            self,
            Family::KNearest | Family::LogisticRegression | Family::Mlp
        )
    }

    /// Validates `params` against the family's schema.
    pub fn validate(self, params: &Hyperparams) -> Result<()> {
        match self {
            Family::DecisionTree => forest::DecisionTreeConfig::from_params(params).map(drop),
            Family::ExtraTrees => forest::ExtraTreesConfig::from_params(params).map(drop),
            Family::GradientBoostedTrees => boost::BoostConfig::from_params(params).map(drop),
            Family::GaussianNb => naive_bayes::GaussianNbConfig::from_params(params).map(drop),
            Family::KNearest => knn::KnnConfig::from_params(params).map(drop),
            Family::LogisticRegression => logistic::LogisticConfig::from_params(params).map(drop),
            Family::Mlp => mlp::MlpConfig::from_params(params).map(drop),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownName(format!("classifier family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    /// Name shown in reports. Presets that stand in for a third-party
    /// booster carry a trailing `*`.
    pub label: String,
    pub family: Family,
    pub hyperparams: Hyperparams,
    pub standardize: bool,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(family: Family) -> Self {
        Self {
            label: family.as_str().to_string(),
            family,
            hyperparams: Hyperparams::new(),
            standardize: family.standardizes_by_default(),
            seed: 0,
        }
    }

    pub fn with_param(mut self, key: &str, value: ParamValue) -> Self {
        self.hyperparams.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_standardize(mut self, on: bool) -> Self {
        self.standardize = on;
        self
    }
}

/// The configured classifier roster, by short name.
pub fn preset(name: &str) -> Result<ClassifierSpec> {
    use ParamValue::{Float, Int, List, Text};
    let spec = match name {
        "dt" => ClassifierSpec::new(Family::DecisionTree)
            .with_param("max_depth", Int(10))
            .with_param("max_features", Int(5))
            .with_param("impurity", Text("gini".into())),
        "gnb" => ClassifierSpec::new(Family::GaussianNb),
        "knn" => ClassifierSpec::new(Family::KNearest).with_param("k", Int(5)),
        "logreg" => ClassifierSpec::new(Family::LogisticRegression)
            .with_param("c", Float(1.0))
            .with_param("tol", Float(1e-6))
            .with_param("max_iter", Int(1000)),
        // family defaults: 100 rounds, depth 6, learning rate 0.3
        "xgb" => ClassifierSpec::new(Family::GradientBoostedTrees),
        "mlp" => ClassifierSpec::new(Family::Mlp)
            .with_param(
                "hidden",
                List(mlp::DEFAULT_HIDDEN.iter().map(|&h| h as i64).collect()),
            )
            .with_param("activation", Text("relu".into()))
            .with_param("iterations", Int(1000)),
        "catboost" => ClassifierSpec::new(Family::GradientBoostedTrees)
            .with_param("iterations", Int(1000))
            .with_param("learning_rate", Float(0.1)),
        "extratrees" => ClassifierSpec::new(Family::ExtraTrees)
            .with_param("n_estimators", Int(1000))
            .with_param("criterion", Text("entropy".into())),
        other => return Err(Error::UnknownName(format!("classifier preset `{other}`"))),
    };
    let label = match name {
        "xgb" | "catboost" => format!("{name}*"),
        _ => name.to_string(),
    };
    Ok(ClassifierSpec { label, ..spec })
}

/// Per-column z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; 1 for constant columns.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &DataView<'_>) -> Self {
        let n = data.n_rows() as f64;
        let d = data.n_cols;
        let mut mean = alloc::vec![0.0; d];
        for row in data.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = alloc::vec![0.0; d];
        for row in data.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n);
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply_into(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.std) {
            *o = (v - m) / s;
        }
    }

    pub fn transform(&self, data: &DataView<'_>) -> Vec<f64> {
        let mut out = alloc::vec![0.0; data.data.len()];
        for (row, dst) in data.rows().zip(out.chunks_exact_mut(data.n_cols)) {
            self.apply_into(row, dst);
        }
        out
    }
}

/// Fitted parameters, one variant per family plus the single-class case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelState {
    Constant { class: u8 },
    DecisionTree(tree::Tree),
    ExtraTrees(forest::Forest),
    Boosted(boost::Boosted),
    GaussianNb(naive_bayes::GaussianNb),
    KNearest(knn::Knn),
    Logistic(logistic::Logistic),
    Mlp(mlp::Network),
}

impl ModelState {
    fn score(&self, row: &[f64]) -> f64 {
        match self {
            ModelState::Constant { class } => f64::from(*class),
            ModelState::DecisionTree(t) => t.eval(row),
            ModelState::ExtraTrees(f) => f.score(row),
            ModelState::Boosted(b) => b.score(row),
            ModelState::GaussianNb(g) => g.score(row),
            ModelState::KNearest(k) => k.score(row),
            ModelState::Logistic(l) => l.score(row),
            ModelState::Mlp(n) => n.score(row),
        }
    }
}

/// Anything that maps a feature vector to a score.
pub trait Scorer {
    fn n_features(&self) -> usize;
    fn score(&self, row: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Scorer for (usize, F) {
    fn n_features(&self) -> usize {
        self.0
    }

    fn score(&self, row: &[f64]) -> f64 {
        (self.1)(row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub feature_names: Vec<String>,
    pub standardizer: Option<Standardizer>,
    pub state: ModelState,
}

fn check_finite(x: &FeatureMatrix, what: &'static str) -> Result<()> {
    match x.find_non_finite() {
        Some((row, col)) => Err(Error::NonFinite { what, row, col }),
        None => Ok(()),
    }
}

/// Fits `spec` on `x` and binary labels `y`. A single-class `y` yields a
/// constant predictor.
pub fn fit(spec: &ClassifierSpec, x: &FeatureMatrix, y: &[u8]) -> Result<TrainedModel> {
    spec.family.validate(&spec.hyperparams)?;
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            what: "feature rows vs labels",
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if x.n_rows() < 2 {
        return Err(Error::InputTooShort {
            required: 2,
            available: x.n_rows(),
        });
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::InvalidParameter(format!("label {bad} is not 0 or 1")));
    }
    check_finite(x, "training features")?;

    let raw = x.rows().flatten().copied().collect::<Vec<f64>>();
    let raw_view = DataView::new(&raw, x.n_cols());
    let standardizer = spec.standardize.then(|| Standardizer::fit(&raw_view));
    let scaled;
    let data = match &standardizer {
        Some(s) => {
            scaled = s.transform(&raw_view);
            DataView::new(&scaled, x.n_cols())
        }
        None => raw_view,
    };

    let pos = y.iter().filter(|&&v| v == 1).count();
    let state = if pos == 0 || pos == y.len() {
        ModelState::Constant {
            class: u8::from(pos > 0),
        }
    } else {
        let p = &spec.hyperparams;
        match spec.family {
            Family::DecisionTree => ModelState::DecisionTree(
                forest::DecisionTreeConfig::from_params(p)?.fit(&data, y, spec.seed),
            ),
            Family::ExtraTrees => ModelState::ExtraTrees(forest::Forest {
                trees: forest::ExtraTreesConfig::from_params(p)?.fit(&data, y, spec.seed),
            }),
            Family::GradientBoostedTrees => {
                ModelState::Boosted(boost::BoostConfig::from_params(p)?.fit(&data, y))
            }
            Family::GaussianNb => {
                ModelState::GaussianNb(naive_bayes::GaussianNbConfig::from_params(p)?.fit(&data, y))
            }
            Family::KNearest => ModelState::KNearest(knn::KnnConfig::from_params(p)?.fit(&data, y)),
            Family::LogisticRegression => {
                ModelState::Logistic(logistic::LogisticConfig::from_params(p)?.fit(&data, y)?)
            }
            Family::Mlp => ModelState::Mlp(mlp::MlpConfig::from_params(p)?.fit(&data, y, spec.seed)?),
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: x.columns().to_vec(),
        standardizer,
        state,
    })
}

impl TrainedModel {
    fn check_columns(&self, x: &FeatureMatrix) -> Result<()> {
        if x.columns() != self.feature_names.as_slice() {
            return Err(Error::ColumnMismatch {
                expected: self.feature_names.clone(),
                got: x.columns().to_vec(),
            });
        }
        Ok(())
    }

    /// Scores for every row of `x`.
    pub fn predict_scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_columns(x)?;
        check_finite(x, "prediction features")?;
        Ok(x.rows().map(|r| self.score_row(r)).collect())
    }

    /// Labels for every row of `x`: 1 iff the score is at least 0.5.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        Ok(self
            .predict_scores(x)?
            .into_iter()
            .map(|p| u8::from(p >= 0.5))
            .collect())
    }

    /// Score of one raw (unstandardized) feature vector.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        match &self.standardizer {
            None => self.state.score(row),
            Some(s) => {
                let mut buf = [0.0; 32];
                if row.len() <= buf.len() {
                    let buf = &mut buf[..row.len()];
                    s.apply_into(row, buf);
                    self.state.score(buf)
                } else {
                    let mut v = alloc::vec![0.0; row.len()];
                    s.apply_into(row, &mut v);
                    self.state.score(&v)
                }
            }
        }
    }
}

impl Scorer for TrainedModel {
    fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn score(&self, row: &[f64]) -> f64 {
        self.score_row(row)
    }
}
