use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use trendcast::chart::{bubble_file_name, bubble_grid, Metric};
use trendcast::config::RunConfig;
use trendcast::csv_io::{read_ohlc, write_features, write_ohlc};
use trendcast::error::AppError;
use trendcast::model_io;
use trendcast::output::{market_tasks, write_bundle};
use trendcast::report::{parse_results_csv, Table3};
use trendcast::runner::{load_inputs, run};
use trendcast_core::dataset::{build, split};
use trendcast_core::explain::{explain_model, sample_background, sample_rows, ShapleyMode, DEFAULT_BACKGROUND};
use trendcast_core::features::{assemble, FeatureSetMask};
use trendcast_core::indicators::IndicatorParams;
use trendcast_core::labeling::{make_labels, TaskKind};
use trendcast_core::learners::fit;
use trendcast_core::metrics::Thresholds;
use trendcast_core::ohlc::{volatility, PriceField};
use trendcast_core::synth::{generate_with_labels, GenKind, GenSpec};

#[derive(Parser)]
#[command(name = "trendcast", version, about = "Next-day open direction prediction from daily OHLC bars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an OHLC CSV and print a summary.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value = "MARKET")]
        market: String,
    },
    /// Generate a synthetic OHLC CSV.
    Synth(SynthArgs),
    /// Write the 16 features and four labels for every usable day.
    Featurize {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        indicators: IndicatorArgs,
    },
    /// Evaluate the full grid and write results, summaries and charts.
    Run(Box<RunArgs>),
    /// Print the reliability summary of a results.csv.
    Table3 {
        results: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        acc_threshold: f64,
        #[arg(long, default_value_t = 0.65)]
        mcc_threshold: f64,
        /// Emit CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Draw bubble-grid SVGs from a results.csv.
    Chart {
        results: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// accuracy, mcc or both.
        #[arg(long, default_value = "both")]
        metric: String,
    },
    /// Shapley attribution for one classifier on one task.
    Explain(ExplainArgs),
}

#[derive(Args)]
struct IndicatorArgs {
    #[arg(long, default_value_t = 20)]
    window_n: usize,
    #[arg(long, default_value_t = 2.0)]
    bollinger_k: f64,
    #[arg(long, default_value_t = 2.0)]
    keltner_k: f64,
    #[arg(long)]
    bollinger_rolling_center: bool,
}

impl IndicatorArgs {
    fn params(&self) -> IndicatorParams {
        IndicatorParams {
            window_n: self.window_n,
            bollinger_k: self.bollinger_k,
            keltner_k: self.keltner_k,
            bollinger_rolling_center: self.bollinger_rolling_center,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// random-walk, trend, constant or separable.
    #[arg(long, default_value = "random-walk")]
    kind: String,
    #[arg(long, default_value_t = 1256)]
    days: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "2019-04-01")]
    start_date: NaiveDate,
    #[arg(long, default_value_t = 100.0)]
    start: f64,
    #[arg(long, default_value_t = 0.0003)]
    drift: f64,
    #[arg(long, default_value_t = 0.01)]
    volatility: f64,
    #[arg(long, default_value_t = 0.0005)]
    slope: f64,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[arg(long, short)]
    out: PathBuf,
}

/// Flags mirroring every config key; each is applied after `--config`.
#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// MARKET:PATH, repeatable.
    #[arg(long)]
    input: Vec<String>,
    #[arg(long)]
    window_n: Option<String>,
    #[arg(long)]
    bollinger_k: Option<String>,
    #[arg(long)]
    keltner_k: Option<String>,
    #[arg(long)]
    bollinger_rolling_center: Option<String>,
    #[arg(long)]
    split_ratio: Option<String>,
    #[arg(long)]
    eval_mode: Option<String>,
    #[arg(long)]
    refit_every: Option<String>,
    #[arg(long)]
    freeze_window: Option<String>,
    #[arg(long)]
    tasks: Option<String>,
    #[arg(long)]
    feature_sets: Option<String>,
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    acc_threshold: Option<String>,
    #[arg(long)]
    mcc_threshold: Option<String>,
    #[arg(long)]
    shap_model: Option<String>,
    #[arg(long)]
    shap_feature_set: Option<String>,
    #[arg(long)]
    shap_tasks: Option<String>,
    #[arg(long)]
    shap_mode: Option<String>,
    #[arg(long)]
    shap_permutations: Option<String>,
    #[arg(long)]
    shap_background: Option<String>,
    #[arg(long)]
    shap_rows: Option<String>,
    #[arg(long)]
    charts: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    /// Any `key=value`, including `hyper.<preset>.<param>=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, AppError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for i in &self.input {
            cfg.set("input", i)?;
        }
        let flags = [
            ("window_n", &self.window_n),
            ("bollinger_k", &self.bollinger_k),
            ("keltner_k", &self.keltner_k),
            ("bollinger_rolling_center", &self.bollinger_rolling_center),
            ("split_ratio", &self.split_ratio),
            ("eval_mode", &self.eval_mode),
            ("refit_every", &self.refit_every),
            ("freeze_window", &self.freeze_window),
            ("tasks", &self.tasks),
            ("feature_sets", &self.feature_sets),
            ("classifiers", &self.classifiers),
            ("seed", &self.seed),
            ("acc_threshold", &self.acc_threshold),
            ("mcc_threshold", &self.mcc_threshold),
            ("shap_model", &self.shap_model),
            ("shap_feature_set", &self.shap_feature_set),
            ("shap_tasks", &self.shap_tasks),
            ("shap_mode", &self.shap_mode),
            ("shap_permutations", &self.shap_permutations),
            ("shap_background", &self.shap_background),
            ("shap_rows", &self.shap_rows),
            ("charts", &self.charts),
            ("threads", &self.threads),
            ("out_dir", &self.out_dir),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                trendcast::error::ConfigError::Value {
                    key: kv.clone(),
                    detail: "expected KEY=VALUE".into(),
                }
            })?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ExplainArgs {
    input: PathBuf,
    #[arg(long, default_value = "MARKET")]
    market: String,
    #[arg(long, default_value = "op")]
    task: TaskKind,
    #[arg(long, default_value = "dt")]
    classifier: String,
    #[arg(long, default_value = "INT+HIST+NOW")]
    feature_set: FeatureSetMask,
    /// exact or sampled.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 200)]
    permutations: usize,
    #[arg(long, default_value_t = DEFAULT_BACKGROUND)]
    background: usize,
    #[arg(long, default_value_t = 100)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    #[command(flatten)]
    indicators: IndicatorArgs,
    /// Use this saved model instead of fitting one.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Save the fitted model here.
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Write `feature,importance` here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let input_error = e.downcast_ref::<AppError>().is_some_and(|a| {
                matches!(a, AppError::Config(_) | AppError::Input { .. } | AppError::Io { .. } | AppError::Core(_))
            });
            ExitCode::from(if input_error { 2 } else { 1 })
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Ingest { input, market } => ingest(&input, &market),
        Command::Synth(a) => synth(a),
        Command::Featurize { input, out, indicators } => featurize(&input, &out, &indicators.params()),
        Command::Run(a) => cmd_run(&a),
        Command::Table3 {
            results,
            acc_threshold,
            mcc_threshold,
            csv,
        } => {
            let thresholds = Thresholds {
                accuracy: acc_threshold,
                mcc: mcc_threshold,
            };
            let t = Table3::from_records(&read_results(&results)?, thresholds)?;
            print!("{}", if csv { t.to_csv(None) } else { t.to_pretty(None) });
            Ok(ExitCode::SUCCESS)
        }
        Command::Chart { results, out, metric } => chart(&results, &out, &metric),
        Command::Explain(a) => explain(a),
    }
}

fn ingest(input: &Path, market: &str) -> anyhow::Result<ExitCode> {
    let s = read_ohlc(input, market)?;
    let bars = s.bars();
    println!("{market}: {} bars, {} to {}", s.len(), bars[0].date, bars[bars.len() - 1].date);
    if let Ok(v) = volatility(&s, PriceField::Close, 252) {
        println!(
            "close log returns: mean {:.6}, daily volatility {:.6}, annualized {:.4}",
            v.mean_return, v.daily_volatility, v.periodized_volatility
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(a: SynthArgs) -> anyhow::Result<ExitCode> {
    let kind = match a.kind.as_str() {
        "random-walk" => GenKind::GeometricRandomWalk {
            start: a.start,
            drift: a.drift,
            volatility: a.volatility,
        },
        "trend" => GenKind::TrendWithNoise {
            start: a.start,
            slope: a.slope,
            noise: a.noise,
        },
        "constant" => GenKind::ConstantMarket { price: a.start },
        "separable" => GenKind::SeparableRegime {
            start: a.start,
            volatility: a.volatility,
            strength: a.strength,
        },
        other => return Err(anyhow!("unknown kind `{other}`")),
    };
    let mut spec = GenSpec::new(kind, a.days, a.seed);
    spec.start_date = a.start_date;
    let g = generate_with_labels(&spec).map_err(AppError::from)?;
    fs::write(&a.out, write_ohlc(&g.series)).map_err(|e| AppError::io(&a.out, e))?;
    eprintln!("wrote {} bars to {}", g.series.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn featurize(input: &Path, out: &Path, params: &IndicatorParams) -> anyhow::Result<ExitCode> {
    let s = read_ohlc(input, "MARKET")?;
    let rows = assemble(&s, params).map_err(AppError::from)?;
    let labels = TaskKind::ALL
        .iter()
        .map(|&t| make_labels(&s, t, params.first_defined_index()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(AppError::from)?;
    fs::write(out, write_features(&rows, &labels)).map_err(|e| AppError::io(out, e))?;
    eprintln!("wrote {} rows to {}", rows.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<ExitCode> {
    let cfg = a.config()?;
    let series = load_inputs(&cfg)?;
    let bundle = run(&cfg, series)?;
    let written = write_bundle(&bundle, &cfg.out_dir, cfg.charts)?;
    eprintln!(
        "{} records, {} attributions, {} files in {}",
        bundle.records.len(),
        bundle.shapley.len(),
        written.len(),
        cfg.out_dir.display()
    );
    if bundle.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &bundle.failures {
            eprintln!(
                "cell failed: {} {} {} {}: {}",
                f.market, f.task, f.feature_set, f.classifier, f.error
            );
        }
        Ok(ExitCode::from(1))
    }
}

fn read_results(path: &Path) -> anyhow::Result<Vec<trendcast_core::metrics::EvalRecord>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_results_csv(&text).map_err(|source| {
        AppError::Input {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn chart(results: &Path, out: &Path, metric: &str) -> anyhow::Result<ExitCode> {
    let records = read_results(results)?;
    let metrics = match metric {
        "both" => vec![Metric::Accuracy, Metric::Mcc],
        m => vec![m.parse::<Metric>().map_err(|e| anyhow!(e))?],
    };
    let text = fs::read_to_string(results).map_err(|e| AppError::io(results, e))?;
    let prov = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .unwrap_or("")
        .to_string();
    fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
    let bundle = trendcast::runner::ResultsBundle {
        provenance: trendcast::runner::Provenance {
            tool: String::new(),
            config_hash: String::new(),
            seed: 0,
            thresholds: Thresholds::default(),
            config: String::new(),
        },
        records,
        shapley: Vec::new(),
        failures: Vec::new(),
    };
    for (market, task) in market_tasks(&bundle) {
        for &m in &metrics {
            let path = out.join(bubble_file_name(&market, task, m));
            fs::write(&path, bubble_grid(&bundle.records, &market, task, m, &prov))
                .map_err(|e| AppError::io(&path, e))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn explain(a: ExplainArgs) -> anyhow::Result<ExitCode> {
    let params = a.indicators.params();
    let s = read_ohlc(&a.input, &a.market)?;
    let ds = build(&s, &params, a.task, &a.feature_set).map_err(AppError::from)?;
    let sp = split(ds.n_points(), a.split_ratio).map_err(AppError::from)?;
    let train = ds.matrix.slice_rows(sp.train());
    let model = match &a.model {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
            model_io::decode(&text)?
        }
        None => {
            let cfg = RunConfig {
                seed: a.seed,
                ..RunConfig::default()
            };
            let spec = cfg.classifier_spec(&a.classifier)?;
            fit(&spec, &train, &ds.y()[sp.train()]).map_err(AppError::from)?
        }
    };
    if let Some(path) = &a.save_model {
        fs::write(path, model_io::encode(&model)).map_err(|e| AppError::io(path, e))?;
    }
    let mode = match a.mode.as_str() {
        "exact" => ShapleyMode::Exact,
        "sampled" => ShapleyMode::Sampled {
            n_permutations: a.permutations,
            seed: a.seed,
        },
        other => return Err(anyhow!("unknown mode `{other}`")),
    };
    let background = sample_background(&train, a.background, a.seed);
    let test = ds.matrix.slice_rows(sp.test());
    let rows = test.take_rows(&sample_rows(test.n_rows(), a.rows, a.seed));
    let report = explain_model(&model, &rows, &background, mode).map_err(AppError::from)?;
    let mut text = format!(
        "# {} input={} market={} task={} classifier={} feature_set={} mode={} background={} rows={} seed={}\nfeature,importance\n",
        trendcast::runner::TOOL,
        a.input.display(),
        a.market,
        a.task.id(),
        model.spec.label,
        a.feature_set,
        mode.name(),
        report.background_size,
        report.rows.len(),
        a.seed
    );
    for i in report.ranking() {
        text.push_str(&format!("{},{}\n", report.feature_names[i], report.global_importance[i]));
    }
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
