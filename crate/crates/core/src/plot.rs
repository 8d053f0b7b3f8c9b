//! Line plots of the tool's CSV output as plain SVG. Output depends only on
//! the CSV contents and the spec.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{LEMMA1_SCHEMA, SWEEP_SCHEMA, THETA_SCHEMA};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 52.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_column: String,
    pub series: Vec<String>,
    pub x_label: String,
    pub y_label: String,
    /// Keep only rows whose first column equals this.
    pub row_kind: Option<String>,
}

impl PlotSpec {
    /// Default layout for a CSV schema tag.
    pub fn for_schema(tag: &str) -> Result<Self> {
        let rates = || {
            [
                "r_sum_secure",
                "r_baseline",
                "r_nonsecure_cf",
                "capacity_sum",
            ]
            .map(String::from)
            .to_vec()
        };
        match tag {
            SWEEP_SCHEMA => Ok(Self {
                title: "Mean sum rates".into(),
                x_column: "snr_db".into(),
                series: rates(),
                x_label: "SNR (dB)".into(),
                y_label: "rate (bits per channel use)".into(),
                row_kind: Some("mean".into()),
            }),
            THETA_SCHEMA => Ok(Self {
                title: "Sum rates over the eavesdropper angle".into(),
                x_column: "theta".into(),
                series: rates(),
                x_label: "theta (rad)".into(),
                y_label: "rate (bits per channel use)".into(),
                row_kind: None,
            }),
            LEMMA1_SCHEMA => Ok(Self {
                title: "Quantizer entropy and bounds".into(),
                x_column: "n".into(),
                series: [
                    "entropy_bits_per_dim",
                    "ratio_bound_bits",
                    "clean_bound_bits",
                ]
                .map(String::from)
                .to_vec(),
                x_label: "dimension n".into(),
                y_label: "bits per dimension".into(),
                row_kind: None,
            }),
            other => Err(Error::Malformed(format!("unknown schema tag '{other}'"))),
        }
    }
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn parse_cell(cell: &str, column: &str, line: usize) -> Result<Option<f64>> {
    if cell.trim().is_empty() {
        return Ok(None);
    }
    cell.trim()
        .parse::<f64>()
        .map(|v| v.is_finite().then_some(v))
        .map_err(|_| {
            Error::Malformed(format!(
                "line {line}, column {column}: '{cell}' is not a number"
            ))
        })
}

fn read_series(csv_text: &str, spec: &PlotSpec) -> Result<Vec<Series>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("missing column '{name}'")))
    };
    let x_idx = col(&spec.x_column)?;
    let y_idx: Vec<usize> = spec.series.iter().map(|s| col(s)).collect::<Result<_>>()?;
    let mut series: Vec<Series> = spec
        .series
        .iter()
        .map(|s| Series {
            name: s.clone(),
            points: Vec::new(),
        })
        .collect();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if let Some(kind) = &spec.row_kind {
            if rec.get(0) != Some(kind.as_str()) {
                continue;
            }
        }
        let cell = |j: usize| {
            rec.get(j)
                .ok_or_else(|| Error::Malformed(format!("line {line} is short")))
        };
        let Some(x) = parse_cell(cell(x_idx)?, &spec.x_column, line)? else {
            continue;
        };
        for (s, &j) in series.iter_mut().zip(&y_idx) {
            if let Some(y) = parse_cell(cell(j)?, &s.name, line)? {
                s.points.push((x, y));
            }
        }
    }
    series.retain(|s| !s.points.is_empty());
    Ok(series)
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// SVG for `csv_text` under `spec`.
pub fn render_svg(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    let series = read_series(csv_text, spec)?;
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in all() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"##,
            MARGIN_TOP,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 16.0
        );
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"##,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(&spec.y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Number of series that `render_svg` would draw.
pub fn series_count(csv_text: &str, spec: &PlotSpec) -> Result<usize> {
    Ok(read_series(csv_text, spec)?.len())
}

/// Schema tag of a CSV produced by this tool.
pub fn schema_tag(csv_text: &str) -> Result<String> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    reader
        .headers()?
        .get(0)
        .map(String::from)
        .ok_or_else(|| Error::Malformed("empty header".into()))
}

/// Reads `csv_path`, plots it with `spec` (or the schema default) and writes
/// the SVG to `out`.
pub fn emit_plot(csv_path: &Path, spec: Option<&PlotSpec>, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    let default;
    let spec = match spec {
        Some(s) => s,
        None => {
            default = PlotSpec::for_schema(&schema_tag(&text)?)?;
            &default
        }
    };
    let svg = render_svg(&text, spec)?;
    std::fs::write(out, svg).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    Ok(())
}
