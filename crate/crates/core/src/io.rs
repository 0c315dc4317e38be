//! CSV and JSON output plus a small line-plot SVG renderer.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::ExperimentResult;

pub const CSV_HEADER: [&str; 6] = ["model", "x", "mean", "stderr", "theoretical", "censored"];

/// One CSV row. For sample-size sweeps `x` is `n` and `theoretical` is
/// empty; for error sweeps `x` is `m` and `censored` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub model: String,
    pub x: usize,
    pub mean: f64,
    pub stderr: f64,
    pub theoretical: Option<f64>,
    pub censored: Option<usize>,
}

pub fn csv_rows(result: &ExperimentResult) -> Vec<CsvRow> {
    let min_sample = result.min_sample_records.iter().map(|r| CsvRow {
        model: r.model_id.clone(),
        x: r.n,
        mean: r.mean_min_m,
        stderr: r.stderr_min_m,
        theoretical: None,
        censored: Some(r.censored),
    });
    let log_error = result.log_error_records.iter().map(|r| CsvRow {
        model: r.model_id.clone(),
        x: r.m,
        mean: r.mean_spectral_error,
        stderr: r.stderr_spectral_error,
        theoretical: Some(r.theoretical_bound),
        censored: None,
    });
    min_sample.chain(log_error).collect()
}

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<'a>(path: &Path, rows: impl Iterator<Item = &'a CsvRow>) -> Result<()> {
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::InvalidInputs(format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record([
            row.model.clone(),
            row.x.to_string(),
            fmt_f64(row.mean),
            fmt_f64(row.stderr),
            row.theoretical.map(fmt_f64).unwrap_or_default(),
            row.censored.map(|c| c.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every record of `result` to one CSV file.
pub fn write_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_rows(path, csv_rows(result).iter())
}

/// Writes `<dir>/<name>_<model slug>.csv` for each model and returns the
/// paths in model order.
pub fn write_csv_per_model(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = csv_rows(result);
    let mut paths = Vec::new();
    for id in result.model_ids() {
        let slug = id.replace([':', ','], "_");
        let path = dir.join(format!("{}_{slug}.csv", result.name));
        write_rows(&path, rows.iter().filter(|r| r.model == id))?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let bad = |msg: String| Error::InvalidInputs(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => bad(format!("{other:?}")),
    })?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let float = |i: usize| field(i).parse::<f64>().map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])));
        let int = |i: usize| field(i).parse::<usize>().map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])));
        rows.push(CsvRow {
            model: field(0).to_string(),
            x: int(1)?,
            mean: float(2)?,
            stderr: float(3)?,
            theoretical: if field(4).is_empty() { None } else { Some(float(4)?) },
            censored: if field(5).is_empty() { None } else { Some(int(5)?) },
        });
    }
    Ok(rows)
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineStyle {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: LineStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSpec {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    output_path: PathBuf,
}

impl PlotSpec {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        series: Vec<Series>,
        output_path: impl Into<PathBuf>,
    ) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::InvalidPlot("a plot needs at least one series".into()));
        }
        for s in &series {
            if s.points.len() < 2 {
                return Err(Error::InvalidPlot(format!("series `{}` has fewer than two points", s.label)));
            }
            if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(Error::InvalidPlot(format!("series `{}` has a non-finite coordinate", s.label)));
            }
        }
        Ok(Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series,
            output_path: output_path.into(),
        })
    }

    pub fn series(&self) -> &[Series] {
        &self.series
    }

    pub fn output_path(&self) -> &Path {
        &self.output_path
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Tick positions on a 1-2-5 grid covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    };
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let ticks = (0..=count).map(|i| start + i as f64 * step).collect();
    (start, end, ticks)
}

fn fmt_tick(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// The SVG document for `spec`. Pure: identical specs give identical bytes.
pub fn svg_string(spec: &PlotSpec) -> String {
    let points = spec.series.iter().flat_map(|s| s.points.iter());
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let (x_lo, x_hi, x_ticks) = nice_ticks(x_lo, x_hi);
    let (y_lo, y_hi, y_ticks) = nice_ticks(y_lo, y_hi);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        TOP / 2.0 + 5.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );
    for &t in &x_ticks {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            fmt_tick(t)
        );
    }
    for &t in &y_ticks {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0:.2}" text-anchor="middle" transform="rotate(-90 20 {0:.2})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );
    for (i, series) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = match series.style {
            LineStyle::Solid => "",
            LineStyle::Dashed => r#" stroke-dasharray="6 4""#,
        };
        let coords: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 25.0,
            lx + 30.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes [`svg_string`] to the spec's output path.
pub fn render_svg(spec: &PlotSpec) -> Result<()> {
    fs::write(&spec.output_path, svg_string(spec)).map_err(|e| Error::io(&spec.output_path, e))
}

/// Plot for an experiment result: mean minimal `m` against `n`, or
/// `log10` mean error against `m` with dashed theoretical curves.
pub fn plot_for(result: &ExperimentResult, output_path: impl Into<PathBuf>) -> Result<PlotSpec> {
    let mut series = Vec::new();
    for id in result.model_ids() {
        if !result.min_sample_records.is_empty() {
            let points = result
                .min_sample_records
                .iter()
                .filter(|r| r.model_id == id)
                .map(|r| (r.n as f64, r.mean_min_m))
                .collect();
            series.push(Series { label: id.clone(), points, style: LineStyle::Solid });
        } else {
            let recs: Vec<_> = result.log_error_records.iter().filter(|r| r.model_id == id).collect();
            series.push(Series {
                label: id.clone(),
                points: recs.iter().map(|r| (r.m as f64, r.log10_mean_error)).collect(),
                style: LineStyle::Solid,
            });
            series.push(Series {
                label: format!("{id} bound"),
                points: recs.iter().map(|r| (r.m as f64, r.theoretical_bound.log10())).collect(),
                style: LineStyle::Dashed,
            });
        }
    }
    if result.min_sample_records.is_empty() {
        PlotSpec::new(
            format!("{}: estimation error vs samples", result.name),
            "number of samples m",
            "log10 mean spectral error",
            series,
            output_path,
        )
    } else {
        PlotSpec::new(
            format!("{}: minimal sample size vs dimension", result.name),
            "dimension n",
            "mean minimal m",
            series,
            output_path,
        )
    }
}
