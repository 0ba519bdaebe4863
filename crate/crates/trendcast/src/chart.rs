//! SVG 1.1 bubble grids and Shapley bar charts.
//!
//! Output depends only on the input records, so identical runs give
//! identical bytes.

use std::fmt::Write as _;

use trendcast_core::labeling::TaskKind;
use trendcast_core::metrics::EvalRecord;

use crate::report::sanitize;
use crate::runner::ShapEntry;

pub const R_MIN: f64 = 3.0;
pub const R_MAX: f64 = 18.0;

const CELL: f64 = 44.0;
const LEFT: f64 = 130.0;
const TOP: f64 = 50.0;
const LIGHT: [f64; 3] = [247.0, 251.0, 255.0];
const DARK: [f64; 3] = [8.0, 48.0, 107.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    Mcc,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Mcc => "mcc",
        }
    }

    pub fn value(self, r: &EvalRecord) -> f64 {
        match self {
            Metric::Accuracy => r.accuracy,
            Metric::Mcc => r.mcc,
        }
    }

    /// Maps the metric onto `[0, 1]`: accuracy as is, MCC via `(mcc + 1) / 2`.
    pub fn normalize(self, v: f64) -> f64 {
        let n = match self {
            Metric::Accuracy => v,
            Metric::Mcc => (v + 1.0) / 2.0,
        };
        if n.is_nan() {
            0.0
        } else {
            n.clamp(0.0, 1.0)
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "accuracy" | "acc" => Ok(Metric::Accuracy),
            "mcc" => Ok(Metric::Mcc),
            _ => Err(format!("unknown metric `{s}` (expected accuracy or mcc)")),
        }
    }
}

pub fn radius(norm: f64) -> f64 {
    R_MIN + (R_MAX - R_MIN) * norm.clamp(0.0, 1.0)
}

/// Light-to-dark blue, darker for larger `norm`.
pub fn colour(norm: f64) -> String {
    let t = norm.clamp(0.0, 1.0);
    let c: Vec<u8> = LIGHT
        .iter()
        .zip(DARK)
        .map(|(a, b)| (a + (b - a) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

fn open_svg(out: &mut String, w: f64, h: f64, title: &str, provenance: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, "<metadata>{}</metadata>", escape(provenance));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Bubble grid for one (market, task): classifiers across, feature sets
/// down. Records for other markets or tasks are ignored and missing cells
/// stay empty.
pub fn bubble_grid(records: &[EvalRecord], market: &str, task: TaskKind, metric: Metric, provenance: &str) -> String {
    let rs: Vec<&EvalRecord> = records
        .iter()
        .filter(|r| r.market == market && r.task == task.id())
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in &rs {
        push_unique(&mut xs, &r.classifier);
        push_unique(&mut ys, &r.feature_set);
    }
    let grid_w = CELL * xs.len().max(1) as f64;
    let grid_h = CELL * ys.len().max(1) as f64;
    let legend_y = TOP + grid_h + 60.0;
    let width = (LEFT + grid_w + 20.0).max(360.0);
    let height = legend_y + 50.0;
    let title = format!("{market} {}: {}", task.title(), metric.name());
    let mut out = String::new();
    open_svg(&mut out, width, height, &title, provenance);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" font-size="13" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(&title)
    );
    out.push_str("<g class=\"grid\" stroke=\"#dddddd\">\n");
    for i in 0..=xs.len() {
        let x = LEFT + CELL * i as f64;
        let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{TOP:.1}" x2="{x:.1}" y2="{:.1}"/>"#, TOP + grid_h);
    }
    for j in 0..=ys.len() {
        let y = TOP + CELL * j as f64;
        let _ = writeln!(out, r#"<line x1="{LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}"/>"#, LEFT + grid_w);
    }
    out.push_str("</g>\n<g class=\"labels\">\n");
    for (j, y) in ys.iter().enumerate() {
        let cy = TOP + CELL * (j as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            cy + 4.0,
            escape(y)
        );
    }
    for (i, x) in xs.iter().enumerate() {
        let cx = LEFT + CELL * (i as f64 + 0.5);
        let ty = TOP + grid_h + 12.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{ty:.1}" text-anchor="end" transform="rotate(-40 {cx:.1} {ty:.1})">{}</text>"#,
            escape(x)
        );
    }
    out.push_str("</g>\n<g class=\"bubbles\">\n");
    for r in &rs {
        let i = xs.iter().position(|x| x == &r.classifier).expect("collected");
        let j = ys.iter().position(|y| y == &r.feature_set).expect("collected");
        let v = metric.value(r);
        let n = metric.normalize(v);
        let _ = writeln!(
            out,
            r##"<circle cx="{:.1}" cy="{:.1}" r="{:.3}" fill="{}" stroke="#333333" stroke-width="0.5"><title>{} / {}: {} = {:.4}</title></circle>"##,
            LEFT + CELL * (i as f64 + 0.5),
            TOP + CELL * (j as f64 + 0.5),
            radius(n),
            colour(n),
            escape(&r.classifier),
            escape(&r.feature_set),
            metric.name(),
            v
        );
    }
    out.push_str("</g>\n");
    legend(&mut out, metric, legend_y);
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, metric: Metric, y: f64) {
    let stops: [f64; 5] = match metric {
        Metric::Accuracy => [0.0, 0.25, 0.5, 0.75, 1.0],
        Metric::Mcc => [-1.0, -0.5, 0.0, 0.5, 1.0],
    };
    out.push_str("<g class=\"legend\">\n");
    let _ = writeln!(out, r#"<text x="20" y="{:.1}">{}</text>"#, y + 4.0, metric.name());
    for (k, &v) in stops.iter().enumerate() {
        let n = metric.normalize(v);
        let cx = 90.0 + 50.0 * k as f64;
        let _ = writeln!(
            out,
            r##"<circle cx="{cx:.1}" cy="{y:.1}" r="{:.3}" fill="{}" stroke="#333333" stroke-width="0.5"/>"##,
            radius(n),
            colour(n)
        );
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{v}</text>"#,
            y + R_MAX + 14.0
        );
    }
    out.push_str("</g>\n");
}

/// Horizontal bars of global importance, largest on top.
pub fn shap_bars(entry: &ShapEntry, provenance: &str) -> String {
    let r = &entry.report;
    let order = r.ranking();
    let max = r.global_importance.iter().cloned().fold(0.0_f64, f64::max);
    let bar_w = 300.0;
    let row_h = 20.0;
    let height = TOP + row_h * order.len() as f64 + 30.0;
    let width = LEFT + bar_w + 110.0;
    let title = format!(
        "{} {}: mean |SHAP|, {} on {}",
        entry.market,
        entry.task.title(),
        entry.classifier,
        entry.feature_set
    );
    let mut out = String::new();
    open_svg(&mut out, width, height, &title, provenance);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" font-size="13" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(&title)
    );
    out.push_str("<g class=\"bars\">\n");
    for (k, &i) in order.iter().enumerate() {
        let v = r.global_importance[i];
        let w = if max > 0.0 { bar_w * v / max } else { 0.0 };
        let y = TOP + row_h * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 14.0,
            escape(&r.feature_names[i])
        );
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT:.1}" y="{:.1}" width="{w:.3}" height="{:.1}" fill="{}"/>"#,
            y + 3.0,
            row_h - 6.0,
            colour(if max > 0.0 { v / max } else { 0.0 })
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{v:.5}</text>"#, LEFT + w + 4.0, y + 14.0);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn bubble_file_name(market: &str, task: TaskKind, metric: Metric) -> String {
    format!("grid_{}_{}_{}.svg", sanitize(market), task.id(), metric.name())
}

pub fn shap_chart_file_name(market: &str, task: TaskKind) -> String {
    format!("shap_{}_{}.svg", sanitize(market), task.id())
}
