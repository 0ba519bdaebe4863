//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! ```text
//! # comment
//! input = SP500-HC:data/sp500_hc.csv     # repeat for more markets
//! window_n = 20
//! tasks = op,hi,lo,cl
//! feature_sets = INT, INT+HIST, INT+NOW, INT+HIST+NOW
//! classifiers = dt,gnb,knn,logreg,xgb,mlp,catboost,extratrees
//! hyper.mlp.iterations = 200              # per-preset hyperparameter override
//! shap_model = dt
//! ```
//!
//! Every key is listed in [`KEYS`]. Later assignments win, except `input`,
//! which appends. Command-line flags go through [`RunConfig::set`] after
//! the file, so they override it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use trendcast_core::dataset::EvalMode;
use trendcast_core::explain::{ShapleyMode, DEFAULT_BACKGROUND};
use trendcast_core::features::FeatureSetMask;
use trendcast_core::indicators::IndicatorParams;
use trendcast_core::labeling::TaskKind;
use trendcast_core::learners::{preset, ClassifierSpec, Hyperparams, ParamValue, PRESET_NAMES};
use trendcast_core::metrics::Thresholds;

use crate::error::{AppError, ConfigError};

/// Recognized keys, in snapshot order. `hyper.<preset>.<param>` keys are
/// accepted in addition.
pub const KEYS: [&str; 25] = [
    "input",
    "window_n",
    "bollinger_k",
    "keltner_k",
    "bollinger_rolling_center",
    "split_ratio",
    "eval_mode",
    "refit_every",
    "freeze_window",
    "tasks",
    "feature_sets",
    "classifiers",
    "seed",
    "acc_threshold",
    "mcc_threshold",
    "shap_model",
    "shap_feature_set",
    "shap_tasks",
    "shap_mode",
    "shap_permutations",
    "shap_background",
    "shap_rows",
    "charts",
    "threads",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MarketInput {
    pub market: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalModeName {
    Static,
    Rolling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapConfig {
    /// Preset whose attributions are computed; `None` disables attribution.
    pub model: Option<String>,
    pub feature_set: FeatureSetMask,
    pub tasks: Vec<TaskKind>,
    pub sampled: bool,
    pub permutations: usize,
    pub background_size: usize,
    /// Cap on attributed test rows, subsampled by seed.
    pub rows: usize,
}

impl ShapConfig {
    pub fn mode(&self, seed: u64) -> ShapleyMode {
        if self.sampled {
            ShapleyMode::Sampled {
                n_permutations: self.permutations,
                seed,
            }
        } else {
            ShapleyMode::Exact
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<MarketInput>,
    pub indicators: IndicatorParams,
    pub split_ratio: f64,
    pub eval_mode: EvalModeName,
    pub refit_every: usize,
    pub freeze_window: bool,
    pub tasks: Vec<TaskKind>,
    pub feature_sets: Vec<FeatureSetMask>,
    pub classifiers: Vec<String>,
    pub hyper: BTreeMap<String, Hyperparams>,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub shap: ShapConfig,
    pub charts: bool,
    /// Worker threads; 0 uses every available core. Not part of the
    /// snapshot because results do not depend on it.
    pub threads: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            indicators: IndicatorParams::default(),
            split_ratio: 0.8,
            eval_mode: EvalModeName::Static,
            refit_every: 1,
            freeze_window: false,
            tasks: TaskKind::ALL.to_vec(),
            feature_sets: FeatureSetMask::DEFAULT_SETS.to_vec(),
            classifiers: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            hyper: BTreeMap::new(),
            seed: 0,
            thresholds: Thresholds::default(),
            shap: ShapConfig {
                model: None,
                feature_set: FeatureSetMask::ALL,
                tasks: TaskKind::ALL.to_vec(),
                sampled: false,
                permutations: 200,
                background_size: DEFAULT_BACKGROUND,
                rows: 100,
            },
            charts: true,
            threads: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn value_err(key: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.into(),
        detail: detail.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| value_err(key, format!("`{v}` is not a valid number")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(value_err(key, format!("`{v}` is not a boolean"))),
    }
}

fn parse_list<T>(
    key: &str,
    v: &str,
    item: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, ConfigError> {
    let items = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).map_err(|e| value_err(key, e)))
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(value_err(key, "list is empty"));
    }
    Ok(items)
}

fn parse_tasks(key: &str, v: &str) -> Result<Vec<TaskKind>, ConfigError> {
    parse_list(key, v, |s| s.parse::<TaskKind>().map_err(|e| e.to_string()))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "input" => {
                let (market, path) = v
                    .split_once(':')
                    .filter(|(m, p)| !m.trim().is_empty() && !p.trim().is_empty())
                    .ok_or_else(|| value_err(key, "expected MARKET:PATH"))?;
                self.inputs.push(MarketInput {
                    market: market.trim().to_string(),
                    path: PathBuf::from(path.trim()),
                });
            }
            "window_n" => self.indicators.window_n = parse_num(key, v)?,
            "bollinger_k" => self.indicators.bollinger_k = parse_num(key, v)?,
            "keltner_k" => self.indicators.keltner_k = parse_num(key, v)?,
            "bollinger_rolling_center" => self.indicators.bollinger_rolling_center = parse_bool(key, v)?,
            "split_ratio" => self.split_ratio = parse_num(key, v)?,
            "eval_mode" => {
                self.eval_mode = match v {
                    "static" => EvalModeName::Static,
                    "rolling" => EvalModeName::Rolling,
                    _ => return Err(value_err(key, "expected `static` or `rolling`")),
                }
            }
            "refit_every" => self.refit_every = parse_num(key, v)?,
            "freeze_window" => self.freeze_window = parse_bool(key, v)?,
            "tasks" => self.tasks = parse_tasks(key, v)?,
            "feature_sets" => {
                self.feature_sets = parse_list(key, v, |s| {
                    s.parse::<FeatureSetMask>().map_err(|e| e.to_string())
                })?
            }
            "classifiers" => {
                self.classifiers = parse_list(key, v, |s| {
                    preset(s).map(|_| s.to_string()).map_err(|e| e.to_string())
                })?
            }
            "seed" => self.seed = parse_num(key, v)?,
            "acc_threshold" => self.thresholds.accuracy = parse_num(key, v)?,
            "mcc_threshold" => self.thresholds.mcc = parse_num(key, v)?,
            "shap_model" => {
                self.shap.model = match v {
                    "" | "none" => None,
                    name => {
                        preset(name).map_err(|e| value_err(key, e.to_string()))?;
                        Some(name.to_string())
                    }
                }
            }
            "shap_feature_set" => {
                self.shap.feature_set = v.parse().map_err(|e: trendcast_core::Error| value_err(key, e.to_string()))?
            }
            "shap_tasks" => self.shap.tasks = parse_tasks(key, v)?,
            "shap_mode" => {
                self.shap.sampled = match v {
                    "exact" => false,
                    "sampled" => true,
                    _ => return Err(value_err(key, "expected `exact` or `sampled`")),
                }
            }
            "shap_permutations" => self.shap.permutations = parse_num(key, v)?,
            "shap_background" => self.shap.background_size = parse_num(key, v)?,
            "shap_rows" => self.shap.rows = parse_num(key, v)?,
            "charts" => self.charts = parse_bool(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            _ => match key.strip_prefix("hyper.").and_then(|k| k.split_once('.')) {
                Some((name, param)) if !param.is_empty() => {
                    preset(name).map_err(|e| value_err(key, e.to_string()))?;
                    self.hyper
                        .entry(name.to_string())
                        .or_default()
                        .insert(param.to_string(), ParamValue::parse(v));
                }
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            },
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                detail: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value).map_err(|e| ConfigError::Syntax {
                line: i + 1,
                detail: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Ok(Self::parse_str(&text)?)
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.eval_mode {
            EvalModeName::Static => EvalMode::StaticSplit,
            EvalModeName::Rolling => EvalMode::RollingOneStep {
                refit_every: self.refit_every,
                freeze_window: self.freeze_window,
            },
        }
    }

    /// The preset `name` with configured overrides and the run seed.
    pub fn classifier_spec(&self, name: &str) -> Result<ClassifierSpec, ConfigError> {
        let mut spec = preset(name).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(extra) = self.hyper.get(name) {
            for (k, v) in extra {
                if k == "standardize" {
                    spec.standardize = matches!(v, ParamValue::Int(1))
                        || matches!(v, ParamValue::Text(t) if t == "true");
                } else {
                    spec.hyperparams.insert(k.clone(), v.clone());
                }
            }
        }
        spec.family
            .validate(&spec.hyperparams)
            .map_err(|e| ConfigError::Invalid(format!("classifier `{name}`: {e}")))?;
        Ok(spec.with_seed(self.seed))
    }

    /// Checks cross-field constraints that single assignments cannot.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.inputs.is_empty() {
            return Err(ConfigError::Invalid("no `input` given".into()));
        }
        let mut markets: Vec<&str> = self.inputs.iter().map(|i| i.market.as_str()).collect();
        markets.sort_unstable();
        if markets.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::Invalid("market ids must be unique".into()));
        }
        self.indicators
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "split_ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if self.refit_every == 0 {
            return Err(ConfigError::Invalid("refit_every must be positive".into()));
        }
        for name in &self.classifiers {
            self.classifier_spec(name)?;
        }
        if let Some(name) = &self.shap.model {
            self.classifier_spec(name)?;
            if self.shap.background_size == 0 || self.shap.rows == 0 {
                return Err(ConfigError::Invalid(
                    "shap_background and shap_rows must be positive".into(),
                ));
            }
            if self.shap.sampled && self.shap.permutations == 0 {
                return Err(ConfigError::Invalid("shap_permutations must be positive".into()));
            }
            if !self.shap.sampled && self.shap.feature_set.column_indices().len() > 20 {
                return Err(ConfigError::Invalid("exact attribution supports at most 20 features".into()));
            }
        }
        Ok(())
    }

    /// Canonical text of every result-affecting setting, in [`KEYS`] order.
    /// `threads` and `out_dir` are left out.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        for i in &self.inputs {
            let _ = writeln!(s, "input = {}:{}", i.market, i.path.display());
        }
        let p = &self.indicators;
        let _ = writeln!(s, "window_n = {}", p.window_n);
        let _ = writeln!(s, "bollinger_k = {}", p.bollinger_k);
        let _ = writeln!(s, "keltner_k = {}", p.keltner_k);
        let _ = writeln!(s, "bollinger_rolling_center = {}", p.bollinger_rolling_center);
        let _ = writeln!(s, "split_ratio = {}", self.split_ratio);
        let mode = match self.eval_mode {
            EvalModeName::Static => "static",
            EvalModeName::Rolling => "rolling",
        };
        let _ = writeln!(s, "eval_mode = {mode}");
        let _ = writeln!(s, "refit_every = {}", self.refit_every);
        let _ = writeln!(s, "freeze_window = {}", self.freeze_window);
        let tasks: Vec<&str> = self.tasks.iter().map(|t| t.id()).collect();
        let _ = writeln!(s, "tasks = {}", tasks.join(","));
        let _ = writeln!(s, "feature_sets = {}", join(&self.feature_sets));
        let _ = writeln!(s, "classifiers = {}", self.classifiers.join(","));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "acc_threshold = {}", self.thresholds.accuracy);
        let _ = writeln!(s, "mcc_threshold = {}", self.thresholds.mcc);
        let _ = writeln!(s, "shap_model = {}", self.shap.model.as_deref().unwrap_or("none"));
        let _ = writeln!(s, "shap_feature_set = {}", self.shap.feature_set);
        let shap_tasks: Vec<&str> = self.shap.tasks.iter().map(|t| t.id()).collect();
        let _ = writeln!(s, "shap_tasks = {}", shap_tasks.join(","));
        let _ = writeln!(s, "shap_mode = {}", if self.shap.sampled { "sampled" } else { "exact" });
        let _ = writeln!(s, "shap_permutations = {}", self.shap.permutations);
        let _ = writeln!(s, "shap_background = {}", self.shap.background_size);
        let _ = writeln!(s, "shap_rows = {}", self.shap.rows);
        let _ = writeln!(s, "charts = {}", self.charts);
        for (name, params) in &self.hyper {
            for (k, v) in params {
                let _ = writeln!(s, "hyper.{name}.{k} = {v}");
            }
        }
        s
    }

    /// SHA-256 of [`RunConfig::snapshot`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.snapshot().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_full_grid() {
        let c = RunConfig::default();
        assert_eq!(c.indicators.window_n, 20);
        assert_eq!(c.split_ratio, 0.8);
        assert_eq!(c.tasks.len(), 4);
        assert_eq!(c.feature_sets.len(), 4);
        assert_eq!(c.classifiers.len(), 8);
        assert_eq!(c.eval_mode(), EvalMode::StaticSplit);
    }

    #[test]
    fn parses_file_grammar() {
        let c = RunConfig::parse_str(
            "# grid\ninput = A:a.csv\ninput = B : b.csv  # second\n\
             tasks = op, cl\nfeature_sets = INT+NOW\nclassifiers = dt,knn\n\
             eval_mode = rolling\nrefit_every = 5\nhyper.knn.k = 7\nseed = 42\n",
        )
        .unwrap();
        assert_eq!(c.inputs.len(), 2);
        assert_eq!(c.inputs[1].market, "B");
        assert_eq!(c.tasks, vec![TaskKind::OpVsOp, TaskKind::OpVsClose]);
        assert_eq!(c.feature_sets, vec![FeatureSetMask::INT_NOW]);
        assert_eq!(
            c.eval_mode(),
            EvalMode::RollingOneStep {
                refit_every: 5,
                freeze_window: false
            }
        );
        assert_eq!(c.classifier_spec("knn").unwrap().hyperparams["k"], ParamValue::Int(7));
        assert_eq!(c.classifier_spec("knn").unwrap().seed, 42);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(RunConfig::parse_str("nonsense"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(RunConfig::parse_str("colour = red").is_err());
        assert!(RunConfig::parse_str("classifiers = dt,svm").is_err());
        assert!(RunConfig::parse_str("tasks = op,xx").is_err());
        assert!(RunConfig::parse_str("window_n = many").is_err());
        assert!(RunConfig::parse_str("hyper.svm.c = 1").is_err());
        let c = RunConfig::parse_str("input = A:a.csv\nhyper.knn.k = 0").unwrap();
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_err());
    }

    #[test]
    fn hash_ignores_threads_and_out_dir() {
        let a = RunConfig::parse_str("input = A:a.csv\nthreads = 1\nout_dir = x").unwrap();
        let b = RunConfig::parse_str("input = A:a.csv\nthreads = 8\nout_dir = y").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse_str("input = A:a.csv\nseed = 1").unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn snapshot_round_trips() {
        let a = RunConfig::parse_str(
            "input = A:a.csv\nfeature_sets = INT+BB+NOW,INT\nshap_model = dt\nhyper.mlp.iterations = 5",
        )
        .unwrap();
        let b = RunConfig::parse_str(&a.snapshot()).unwrap();
        assert_eq!(a.snapshot(), b.snapshot());
        assert_eq!(a.hash(), b.hash());
    }
}
