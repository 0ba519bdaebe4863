//! Tabular outputs: `results.csv`, `results.json`, `shap_<market>_<task>.csv`
//! and the reliability summary.
//!
//! Text outputs open with a `# trendcast <version> config=<sha256> seed=<n>`
//! line so every file names the run that produced it.

use std::fmt::Write as _;

use trendcast_core::labeling::TaskKind;
use trendcast_core::metrics::{EvalRecord, Thresholds};

use crate::error::CsvError;
use crate::runner::{ResultsBundle, ShapEntry};

pub const RESULTS_HEADER: &str = "market,task,feature_set,classifier,accuracy,mcc,n_train,n_test,effective";

pub fn results_csv(bundle: &ResultsBundle) -> String {
    let mut out = format!("# {}\n{RESULTS_HEADER}\n", bundle.provenance.header());
    for r in &bundle.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.market, r.task, r.feature_set, r.classifier, r.accuracy, r.mcc, r.n_train, r.n_test, r.effective
        );
    }
    out
}

pub fn results_json(bundle: &ResultsBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("bundle serializes");
    s.push('\n');
    s
}

/// Parses `results.csv`. Lines starting with `#` are skipped.
pub fn parse_results_csv(text: &str) -> Result<Vec<EvalRecord>, CsvError> {
    if text.trim().is_empty() {
        return Err(CsvError::Empty);
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CsvError::Malformed {
            line: 1,
            detail: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != RESULTS_HEADER {
        return Err(CsvError::Header {
            expected: RESULTS_HEADER,
            found: header,
        });
    }
    reader
        .deserialize::<EvalRecord>()
        .map(|r| {
            r.map_err(|e| CsvError::Malformed {
                line: e.position().map_or(0, |p| p.line()),
                detail: e.to_string(),
            })
        })
        .collect()
}

/// `feature,importance`, most important first.
pub fn shap_csv(entry: &ShapEntry, provenance_header: &str) -> String {
    let r = &entry.report;
    let mut out = format!(
        "# {provenance_header} model={} feature_set={} mode={} background={} rows={}\nfeature,importance\n",
        entry.classifier,
        entry.feature_set,
        r.mode.name(),
        r.background_size,
        r.rows.len()
    );
    for i in r.ranking() {
        let _ = writeln!(out, "{},{}", r.feature_names[i], r.global_importance[i]);
    }
    out
}

pub fn shap_file_name(market: &str, task: TaskKind) -> String {
    format!("shap_{}_{}.csv", sanitize(market), task.id())
}

/// Keeps ASCII alphanumerics, `-` and `_`; everything else becomes `_`.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Reliability of one (market, task) subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct Reliability {
    pub market: String,
    pub task: TaskKind,
    /// Some classifier reached the accuracy threshold.
    pub accuracy: bool,
    /// Some classifier reached the MCC threshold.
    pub mcc: bool,
    /// Some single classifier reached both.
    pub effective: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3 {
    pub thresholds: Thresholds,
    pub markets: Vec<String>,
    pub tasks: Vec<TaskKind>,
    /// Market-major, tasks in [`TaskKind::ALL`] order.
    pub cells: Vec<Reliability>,
}

impl Table3 {
    /// Summarizes `records` under `thresholds`; the stored `effective` flags
    /// are ignored so overrides take effect. Markets keep first-seen order.
    pub fn from_records(records: &[EvalRecord], thresholds: Thresholds) -> Result<Self, CsvError> {
        let mut markets: Vec<String> = Vec::new();
        let mut tasks: Vec<TaskKind> = Vec::new();
        for r in records {
            if !markets.contains(&r.market) {
                markets.push(r.market.clone());
            }
            let t: TaskKind = r.task.parse()?;
            if !tasks.contains(&t) {
                tasks.push(t);
            }
        }
        tasks.sort();
        let mut cells = Vec::new();
        for m in &markets {
            for &t in &tasks {
                let rs = records.iter().filter(|r| &r.market == m && r.task == t.id());
                let mut cell = Reliability {
                    market: m.clone(),
                    task: t,
                    accuracy: false,
                    mcc: false,
                    effective: false,
                };
                for r in rs {
                    cell.accuracy |= r.accuracy >= thresholds.accuracy;
                    cell.mcc |= r.mcc >= thresholds.mcc;
                    cell.effective |= thresholds.is_effective(r.accuracy, r.mcc);
                }
                cells.push(cell);
            }
        }
        Ok(Self {
            thresholds,
            markets,
            tasks,
            cells,
        })
    }

    pub fn cell(&self, market: &str, task: TaskKind) -> Option<&Reliability> {
        self.cells.iter().find(|c| c.market == market && c.task == task)
    }

    fn header_comment(&self, provenance: Option<&str>) -> String {
        let mut s = String::from("# ");
        if let Some(p) = provenance {
            s.push_str(p);
            s.push(' ');
        }
        let _ = writeln!(
            s,
            "acc_threshold={} mcc_threshold={}",
            self.thresholds.accuracy, self.thresholds.mcc
        );
        s
    }

    /// `market,task,title,question,accuracy,mcc,effective` with booleans.
    pub fn to_csv(&self, provenance: Option<&str>) -> String {
        let mut out = self.header_comment(provenance);
        out.push_str("market,task,title,question,accuracy,mcc,effective\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},\"{}\",{},{},{}",
                c.market,
                c.task.id(),
                c.task.title(),
                c.task.question(),
                c.accuracy,
                c.mcc,
                c.effective
            );
        }
        out
    }

    /// One row per task, then `Acc.`, `MCC` and `Both` columns per market.
    /// `✓` marks a met threshold, `–` an unmet one.
    pub fn to_pretty(&self, provenance: Option<&str>) -> String {
        let mark = |b: bool| if b { "✓" } else { "–" };
        let mut header = vec!["Task".to_string(), "Implication".to_string()];
        for m in &self.markets {
            for col in ["Acc.", "MCC", "Both"] {
                header.push(format!("{m} {col}"));
            }
        }
        let mut rows = vec![header];
        for &t in &self.tasks {
            let mut row = vec![t.title().to_string(), t.question().to_string()];
            for m in &self.markets {
                match self.cell(m, t) {
                    Some(c) => {
                        row.extend([mark(c.accuracy), mark(c.mcc), mark(c.effective)].map(String::from));
                    }
                    None => row.extend(["", "", ""].map(String::from)),
                }
            }
            rows.push(row);
        }
        let n_cols = rows[0].len();
        let widths: Vec<usize> = (0..n_cols)
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = self.header_comment(provenance);
        for (i, r) in rows.iter().enumerate() {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            out.push_str(cells.join(" | ").trim_end());
            out.push('\n');
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                out.push_str(&rule.join("-+-"));
                out.push('\n');
            }
        }
        out
    }
}
