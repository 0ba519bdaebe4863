//! Writes a [`ResultsBundle`] to an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use trendcast_core::labeling::TaskKind;

use crate::chart::{bubble_file_name, bubble_grid, shap_bars, shap_chart_file_name, Metric};
use crate::error::AppError;
use crate::report::{results_csv, results_json, shap_csv, shap_file_name, Table3};
use crate::runner::ResultsBundle;

fn write(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<(), AppError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| AppError::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// (market, task) pairs present in the records, in first-seen order.
pub fn market_tasks(bundle: &ResultsBundle) -> Vec<(String, TaskKind)> {
    let mut out: Vec<(String, TaskKind)> = Vec::new();
    for r in &bundle.records {
        if let Ok(t) = r.task.parse::<TaskKind>() {
            if !out.iter().any(|(m, k)| m == &r.market && *k == t) {
                out.push((r.market.clone(), t));
            }
        }
    }
    out
}

/// Writes `results.csv`, `results.json`, `table3.csv`, `table3.txt`,
/// per-attribution CSVs and, when `charts` is set, SVGs. Returns the paths
/// in write order.
pub fn write_bundle(bundle: &ResultsBundle, dir: &Path, charts: bool) -> Result<Vec<PathBuf>, AppError> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let prov = bundle.provenance.header();
    let mut written = Vec::new();
    write(dir, "results.csv", &results_csv(bundle), &mut written)?;
    write(dir, "results.json", &results_json(bundle), &mut written)?;
    if !bundle.records.is_empty() {
        let t3 = Table3::from_records(&bundle.records, bundle.provenance.thresholds)
            .map_err(|e| AppError::Model(e.to_string()))?;
        write(dir, "table3.csv", &t3.to_csv(Some(&prov)), &mut written)?;
        write(dir, "table3.txt", &t3.to_pretty(Some(&prov)), &mut written)?;
    }
    for entry in &bundle.shapley {
        write(dir, &shap_file_name(&entry.market, entry.task), &shap_csv(entry, &prov), &mut written)?;
    }
    if charts {
        for (market, task) in market_tasks(bundle) {
            for metric in [Metric::Accuracy, Metric::Mcc] {
                let svg = bubble_grid(&bundle.records, &market, task, metric, &prov);
                write(dir, &bubble_file_name(&market, task, metric), &svg, &mut written)?;
            }
        }
        for entry in &bundle.shapley {
            write(dir, &shap_chart_file_name(&entry.market, entry.task), &shap_bars(entry, &prov), &mut written)?;
        }
    }
    if !bundle.failures.is_empty() {
        let mut log = String::new();
        for f in &bundle.failures {
            log.push_str(&format!(
                "{} {} {} {}: {}\n",
                f.market, f.task, f.feature_set, f.classifier, f.error
            ));
        }
        write(dir, "failures.log", &log, &mut written)?;
    }
    Ok(written)
}
