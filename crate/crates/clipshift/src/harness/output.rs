//! CSV and SVG writers.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses back
//! to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::trace::{Metric, Trace};

use super::experiment::{ExperimentResult, QuantileCurve, RunConfig};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.to_path_buf(), message: e.to_string() }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

/// `solver,trial,step,metric,value`, one row per recorded value.
pub fn write_traces_csv(traces: &[Trace], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["solver", "trial", "step", "metric", "value"]).map_err(|e| io_err(path, e))?;
    for t in traces {
        for (step, row) in t.steps.iter().zip(&t.values) {
            for (m, v) in t.metrics.iter().zip(row) {
                w.write_record([t.solver.as_str(), &t.trial.to_string(), &step.to_string(), m.name(), &fmt_f64(*v)])
                    .map_err(|e| io_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// `solver,step,metric,quantile,value`.
pub fn write_curves_csv(curves: &[QuantileCurve], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["solver", "step", "metric", "quantile", "value"]).map_err(|e| io_err(path, e))?;
    for c in curves {
        for (step, v) in c.steps.iter().zip(&c.values) {
            w.write_record([c.solver.as_str(), &step.to_string(), c.metric.name(), &fmt_f64(c.quantile), &fmt_f64(*v)])
                .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRow {
    pub solver: String,
    pub trial: u64,
    pub step: usize,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CurveRow {
    pub solver: String,
    pub step: usize,
    pub metric: Metric,
    pub quantile: f64,
    pub value: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| io_err(path, e))).collect()
}

pub fn read_traces_csv(path: &Path) -> Result<Vec<TraceRow>> {
    read_rows(path)
}

pub fn read_curves_csv(path: &Path) -> Result<Vec<CurveRow>> {
    read_rows(path)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// SVG of `metric` on a log-log scale, one polyline per (solver, quantile).
/// Nonpositive or non-finite points are skipped.
pub fn render_svg(curves: &[QuantileCurve], metric: Metric) -> String {
    let chosen: Vec<&QuantileCurve> = curves.iter().filter(|c| c.metric == metric).collect();
    let pts = |c: &QuantileCurve| -> Vec<(f64, f64)> {
        c.steps
            .iter()
            .zip(&c.values)
            .filter(|(_, v)| v.is_finite() && **v > 0.0)
            .map(|(&s, &v)| (((s + 1) as f64).log10(), v.log10()))
            .collect()
    };
    let all: Vec<(f64, f64)> = chosen.iter().flat_map(|c| pts(c)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    if !all.is_empty() {
        x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{} (log10) vs log10(step+1)</text>"#,
        WIDTH / 2.0,
        metric.name()
    );
    for (lab, v, x, y) in [
        ("x", x0, MARGIN, HEIGHT - MARGIN + 20.0),
        ("x", x1, WIDTH - MARGIN, HEIGHT - MARGIN + 20.0),
        ("y", y0, MARGIN - 8.0, HEIGHT - MARGIN),
        ("y", y1, MARGIN - 8.0, MARGIN + 4.0),
    ] {
        let anchor = if lab == "x" { "middle" } else { "end" };
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v:.2}</text>"#
        );
    }
    for (i, c) in chosen.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = pts(c).iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-solver="{}" data-quantile="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&c.solver),
            c.quantile,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{} q={}</text>"#,
            WIDTH - MARGIN + 4.0 - 150.0,
            MARGIN + 14.0 * (i as f64 + 1.0),
            escape(&c.solver),
            c.quantile
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn write_svg(curves: &[QuantileCurve], metric: Metric, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    fs::write(path, render_svg(curves, metric)).map_err(|e| io_err(path, e))
}

/// Writes `traces.csv`, `curves.csv`, `config.json`, `schedules.json` and,
/// if asked, one SVG per metric into `dir`. Returns the files written.
pub fn write_experiment(result: &ExperimentResult, cfg: &RunConfig, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = vec![dir.join("traces.csv"), dir.join("curves.csv")];
    write_traces_csv(&result.traces, &files[0])?;
    write_curves_csv(&result.curves, &files[1])?;
    let config = dir.join("config.json");
    fs::write(&config, cfg.to_json() + "\n").map_err(|e| io_err(&config, e))?;
    files.push(config);
    let schedules = dir.join("schedules.json");
    let text = serde_json::to_string_pretty(&result.solvers).expect("schedules serialize");
    fs::write(&schedules, text + "\n").map_err(|e| io_err(&schedules, e))?;
    files.push(schedules);
    if svg {
        for m in &cfg.plan.metrics {
            let path = dir.join(format!("{}.svg", m.name()));
            write_svg(&result.curves, *m, &path)?;
            files.push(path);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 5e-324, f64::MAX, -2.5e-300, 123456789.123456789] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let c = |solver: &str, q: f64| QuantileCurve {
            solver: solver.into(),
            metric: Metric::SqDist,
            quantile: q,
            steps: vec![0, 10, 100],
            values: vec![1.0, 0.1, 0.0],
        };
        let curves = vec![c("a", 0.5), c("a", 0.9), c("b", 0.5)];
        let svg = render_svg(&curves, Metric::SqDist);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(render_svg(&curves, Metric::ObjGap).matches("<polyline").count(), 0);
    }
}
