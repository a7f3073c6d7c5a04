use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::cover::CoverResult;
use crate::error::{PcsError, Result};

/// Exact header of every result CSV.
pub const CSV_HEADER: [&str; 9] = [
    "experiment",
    "trial",
    "m",
    "sigma",
    "method",
    "error_l2",
    "runtime_ms",
    "seed",
    "aux",
];

/// One estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub trial: usize,
    pub m: usize,
    pub sigma: f64,
    pub method: String,
    pub error_l2: f64,
    pub runtime_ms: f64,
    pub seed: u64,
    /// Extra metrics, written as `key=value;…` in key order.
    pub aux: BTreeMap<String, f64>,
}

impl ResultRow {
    pub fn aux_string(&self) -> String {
        let mut s = String::new();
        for (i, (k, v)) in self.aux.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            let _ = write!(s, "{k}={v}");
        }
        s
    }
}

/// Parses an `aux` field back into a map.
pub fn parse_aux(text: &str) -> Result<BTreeMap<String, f64>> {
    text.split(';')
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| PcsError::InvalidInput(format!("malformed aux entry '{pair}'")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| PcsError::InvalidInput(format!("aux value '{v}' is not a number")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

/// Row of a cover-curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverRow {
    pub eta: f64,
    pub delta: f64,
    pub count: usize,
    pub covered_mass: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl CoverRow {
    pub fn from_result(r: &CoverResult, n_samples: usize, seed: u64) -> Self {
        Self {
            eta: r.eta,
            delta: r.delta,
            count: r.count,
            covered_mass: r.covered_mass,
            n_samples,
            seed,
        }
    }
}

/// A labelled polyline for [`emit_svg_lines`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn io_error(path: &Path, source: std::io::Error) -> PcsError {
    PcsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, e: csv::Error) -> PcsError {
    io_error(path, std::io::Error::other(e.to_string()))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    Ok(())
}

/// Writes result rows with the fixed header; an empty slice gives a header-only file.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.trial.to_string(),
            r.m.to_string(),
            r.sigma.to_string(),
            r.method.clone(),
            r.error_l2.to_string(),
            r.runtime_ms.to_string(),
            r.seed.to_string(),
            r.aux_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Reads a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(PcsError::InvalidInput(format!(
            "unexpected header in {}",
            path.display()
        )));
    }
    let bad = |field: &str| PcsError::InvalidInput(format!("cannot parse {field} in {}", path.display()));
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            Ok(ResultRow {
                experiment: rec[0].to_string(),
                trial: rec[1].parse().map_err(|_| bad("trial"))?,
                m: rec[2].parse().map_err(|_| bad("m"))?,
                sigma: rec[3].parse().map_err(|_| bad("sigma"))?,
                method: rec[4].to_string(),
                error_l2: rec[5].parse().map_err(|_| bad("error_l2"))?,
                runtime_ms: rec[6].parse().map_err(|_| bad("runtime_ms"))?,
                seed: rec[7].parse().map_err(|_| bad("seed"))?,
                aux: parse_aux(&rec[8])?,
            })
        })
        .collect()
}

pub fn emit_cover_csv(rows: &[CoverRow], path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    if rows.is_empty() {
        w.write_record(["eta", "delta", "count", "covered_mass", "n_samples", "seed"])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Bounds table: one line per report.
pub fn emit_bounds_csv(reports: &[BoundReport], path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["name", "lhs", "rhs", "holds", "applicable", "units", "inputs", "note"])
        .map_err(|e| csv_error(path, e))?;
    for r in reports {
        let inputs = r
            .inputs
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.name.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.holds.to_string(),
            r.applicable.to_string(),
            r.units.clone(),
            inputs,
            r.note.clone(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, std::io::Error::other(e.to_string())))?;
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal line chart, one polyline per series.
pub fn emit_svg_lines(series: &[Series], title: &str, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (SVG_W - 2.0 * MARGIN);
    let sy = |y: f64| SVG_H - MARGIN - (y - y0) / (y1 - y0) * (SVG_H - 2.0 * MARGIN);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        SVG_W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{}">{x0:.3}</text>"#,
        SVG_H - MARGIN + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{x1:.3}</text>"#,
        SVG_W - MARGIN,
        SVG_H - MARGIN + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{y0:.3}</text>"#,
        MARGIN - 4.0,
        SVG_H - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{y1:.3}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            SVG_W - MARGIN + 4.0,
            MARGIN + 16.0 * i as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| io_error(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
