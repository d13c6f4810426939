//! Static SVG line plots of harness CSV files.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::table::Table;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Empirical and analytical RMSE with the `sqrt(CRLB)` reference, log axis.
    Rmse,
    /// Bound curves.
    Crlb,
    /// Noncircular-to-circular bound ratio.
    Ratio,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rmse" => Ok(PlotKind::Rmse),
            "crlb" => Ok(PlotKind::Crlb),
            "ratio" => Ok(PlotKind::Ratio),
            other => Err(Error::Config(format!("unknown plot kind {other:?}"))),
        }
    }
}

const W: f64 = 720.0;
const H: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    dash: &'static str,
}

fn select(table: &Table, kind: PlotKind) -> (Vec<usize>, bool, &'static str) {
    let cols = |pred: &dyn Fn(&str) -> bool| -> Vec<usize> {
        (1..table.header.len()).filter(|&i| pred(&table.header[i])).collect()
    };
    match kind {
        PlotKind::Rmse => (
            cols(&|h| h.starts_with("rmse_") || h.starts_with("crlb_") || h.starts_with("analytical_rmse_")),
            true,
            "RMSE (deg)",
        ),
        PlotKind::Crlb => {
            let logged = cols(&|h| h.starts_with("log10_crlb_"));
            if logged.is_empty() {
                (cols(&|h| h.starts_with("crlb_")), true, "sqrt CRLB (deg)")
            } else {
                (logged, false, "log10 CRLB (rad^2)")
            }
        }
        PlotKind::Ratio => (cols(&|h| h.starts_with("ratio_")), false, "CRLB ratio"),
    }
}

fn dash_for(name: &str) -> &'static str {
    if name.starts_with("crlb_") || name.ends_with("_circular") && !name.ends_with("_noncircular") {
        "6 4"
    } else if name.starts_with("analytical_") {
        "2 3"
    } else {
        ""
    }
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64, log: bool) -> String {
    if log {
        if (v - v.round()).abs() < 1e-9 {
            format!("1e{}", v.round() as i64)
        } else {
            format!("{:.3}", 10f64.powf(v))
        }
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

fn padded(lo: f64, hi: f64, frac: f64) -> (f64, f64) {
    if hi > lo {
        let p = (hi - lo) * frac;
        (lo - p, hi + p)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Render `table` as SVG text.
pub fn render_svg(table: &Table, kind: PlotKind, title: &str) -> Result<String> {
    let (cols, log_y, ylabel) = select(table, kind);
    if cols.is_empty() {
        return Err(Error::MalformedCsv(format!("no columns to plot for {kind:?}")));
    }
    let xs = table.column(0);
    let series: Vec<Series> = cols
        .iter()
        .map(|&c| Series {
            name: table.header[c].clone(),
            points: xs
                .iter()
                .zip(table.column(c))
                .filter_map(|(x, y)| {
                    let y = y?;
                    let y = if log_y { (y > 0.0).then(|| y.log10())? } else { y };
                    y.is_finite().then_some((x.unwrap(), y))
                })
                .collect(),
            dash: dash_for(&table.header[c]),
        })
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::MalformedCsv("no finite values to plot".into()));
    }
    let xv: Vec<f64> = xs.iter().map(|x| x.unwrap()).collect();
    let (x0, x1) = padded(
        xv.iter().cloned().fold(f64::INFINITY, f64::min),
        xv.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        0.0,
    );
    let (y0, y1) = padded(
        all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        0.05,
    );
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    for t in ticks(x0, x1) {
        let px = sx(t);
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP:.2}" x2="{px:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, label(t, false));
    }
    for t in ticks(y0, y1) {
        let py = sy(t);
        let _ = writeln!(s, r##"<line x1="{LEFT:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, label(t, log_y));
    }
    let _ = writeln!(s, r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 15.0, escape(&table.header[0]));
    let _ = writeln!(s, r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#, TOP + ph / 2.0, escape(ylabel));

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if ser.dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{}""#, ser.dash) };
        if !ser.points.is_empty() {
            let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#, pts.join(" "));
            for &(x, y) in &ser.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.8"{dash}/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Read `csv`, render `kind`, write SVG to `out`.
pub fn emit_plot(csv: &Path, kind: PlotKind, out: &Path) -> Result<()> {
    let table = Table::read(csv)?;
    let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let svg = render_svg(&table, kind, &title)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, svg)?;
    Ok(())
}
