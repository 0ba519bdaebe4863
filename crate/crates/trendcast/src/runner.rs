//! Grid evaluation: markets × tasks × feature sets × classifiers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use trendcast_core::dataset::{bind, rolling_predict, split, LabeledDataset};
use trendcast_core::explain::{attribute, check_model_columns, sample_background, sample_rows, ShapleyReport};
use trendcast_core::features::{assemble, select, FeatureRow, FeatureSetMask};
use trendcast_core::labeling::{make_labels, TaskKind};
use trendcast_core::learners::fit;
use trendcast_core::metrics::{confusion, EvalRecord, Thresholds};
use trendcast_core::ohlc::OhlcSeries;

use crate::config::RunConfig;
use crate::csv_io::read_ohlc;
use crate::error::AppError;

pub const TOOL: &str = concat!("trendcast ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
    pub thresholds: Thresholds,
    /// Canonical config text; feeding it back reproduces the run.
    pub config: String,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            tool: TOOL.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            thresholds: cfg.thresholds,
            config: cfg.snapshot(),
        }
    }

    /// One-line form used as a `#` header in text outputs.
    pub fn header(&self) -> String {
        format!("{} config={} seed={}", self.tool, self.config_hash, self.seed)
    }
}

/// A grid cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub market: String,
    pub task: String,
    pub feature_set: String,
    pub classifier: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapEntry {
    pub market: String,
    pub task: TaskKind,
    pub classifier: String,
    pub feature_set: String,
    pub report: ShapleyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsBundle {
    pub provenance: Provenance,
    pub records: Vec<EvalRecord>,
    pub shapley: Vec<ShapEntry>,
    pub failures: Vec<CellFailure>,
}

/// Reads every configured input. Market ids come from the config, not the file.
pub fn load_inputs(cfg: &RunConfig) -> Result<Vec<OhlcSeries>, AppError> {
    cfg.inputs
        .iter()
        .map(|i| read_ohlc(&i.path, &i.market))
        .collect()
}

struct Prepared {
    series: OhlcSeries,
    rows: Vec<FeatureRow>,
}

impl Prepared {
    fn dataset(&self, cfg: &RunConfig, task: TaskKind, mask: &FeatureSetMask) -> trendcast_core::Result<LabeledDataset> {
        let matrix = select(&self.rows, mask)?;
        let labels = make_labels(&self.series, task, cfg.indicators.first_defined_index())?;
        bind(matrix, labels, self.series.market())
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, AppError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Model(format!("thread pool: {e}")))
}

/// Evaluates the configured grid on already-loaded series. Input problems
/// such as a series too short for the window are errors; a cell whose fit
/// fails is reported in [`ResultsBundle::failures`] instead.
pub fn run(cfg: &RunConfig, series: Vec<OhlcSeries>) -> Result<ResultsBundle, AppError> {
    cfg.validate()?;
    let prepared = series
        .into_iter()
        .map(|s| {
            let rows = assemble(&s, &cfg.indicators)?;
            Ok(Prepared { series: s, rows })
        })
        .collect::<Result<Vec<_>, AppError>>()?;

    let mut datasets = Vec::new();
    for p in &prepared {
        for &task in &cfg.tasks {
            for fs in &cfg.feature_sets {
                let ds = p.dataset(cfg, task, fs)?;
                let sp = split(ds.n_points(), cfg.split_ratio)?;
                datasets.push((ds, sp, fs.to_string()));
            }
        }
    }
    let cells: Vec<(usize, &str)> = (0..datasets.len())
        .flat_map(|d| cfg.classifiers.iter().map(move |c| (d, c.as_str())))
        .collect();

    let pool = pool(cfg.threads)?;
    let mode = cfg.eval_mode();
    let outcomes: Vec<Result<EvalRecord, CellFailure>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(d, name)| {
                let (ds, sp, fs) = &datasets[d];
                let fail = |error: String| CellFailure {
                    market: ds.market.clone(),
                    task: ds.task.id().to_string(),
                    feature_set: fs.clone(),
                    classifier: name.to_string(),
                    error,
                };
                let spec = cfg.classifier_spec(name).map_err(|e| fail(e.to_string()))?;
                let pred = rolling_predict(ds, sp, &spec, mode).map_err(|e| fail(e.to_string()))?;
                let cm = confusion(&ds.y()[sp.test()], &pred).map_err(|e| fail(e.to_string()))?;
                Ok(EvalRecord::new(
                    ds.market.clone(),
                    ds.task.id().to_string(),
                    fs.clone(),
                    spec.label.clone(),
                    &cm,
                    sp.n_train,
                    sp.n_test(),
                    &cfg.thresholds,
                ))
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }

    let mut shapley = Vec::new();
    if let Some(name) = &cfg.shap.model {
        for p in &prepared {
            for &task in &cfg.shap.tasks {
                match pool.install(|| explain_cell(cfg, p, task, name)) {
                    Ok(entry) => shapley.push(entry),
                    Err(e) => failures.push(CellFailure {
                        market: p.series.market().to_string(),
                        task: task.id().to_string(),
                        feature_set: cfg.shap.feature_set.to_string(),
                        classifier: format!("shap:{name}"),
                        error: e,
                    }),
                }
            }
        }
    }

    Ok(ResultsBundle {
        provenance: Provenance::of(cfg),
        records,
        shapley,
        failures,
    })
}

/// Fits `name` on the training split and attributes a seeded subsample of
/// test rows against a seeded background drawn from training rows.
fn explain_cell(cfg: &RunConfig, p: &Prepared, task: TaskKind, name: &str) -> Result<ShapEntry, String> {
    let ds = p.dataset(cfg, task, &cfg.shap.feature_set).map_err(|e| e.to_string())?;
    let sp = split(ds.n_points(), cfg.split_ratio).map_err(|e| e.to_string())?;
    let spec = cfg.classifier_spec(name).map_err(|e| e.to_string())?;
    let train = ds.matrix.slice_rows(sp.train());
    let model = fit(&spec, &train, &ds.y()[sp.train()]).map_err(|e| e.to_string())?;
    let background = sample_background(&train, cfg.shap.background_size, cfg.seed);
    let test = ds.matrix.slice_rows(sp.test());
    let rows = test.take_rows(&sample_rows(test.n_rows(), cfg.shap.rows, cfg.seed));
    check_model_columns(&model, &rows).map_err(|e| e.to_string())?;
    let mode = cfg.shap.mode(cfg.seed);
    let attributed = (0..rows.n_rows())
        .into_par_iter()
        .map(|i| attribute(&model, rows.row(i), rows.dates()[i], &background, mode))
        .collect::<trendcast_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let report = ShapleyReport::from_rows(rows.columns().to_vec(), attributed, mode, background.n_rows())
        .map_err(|e| e.to_string())?;
    Ok(ShapEntry {
        market: ds.market.clone(),
        task,
        classifier: spec.label.clone(),
        feature_set: cfg.shap.feature_set.to_string(),
        report,
    })
}
