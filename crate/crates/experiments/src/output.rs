//! CSV tables and minimal SVG figures.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{ExpError, Result};
use crate::phase::PhaseRow;
use crate::sweep::StatdimRow;

pub fn emit_csv<R: Serialize>(rows: &[R], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(ExpError::Config(format!("no rows to write to {}", path.display())));
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(ExpError::from)).collect()
}

/// A polyline with symmetric error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Line plot of statdim means against `n`, one series per family and `s`,
/// with ±stderr bars.
pub fn emit_statdim_svg(rows: &[StatdimRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(ExpError::Config("no rows to plot".into()));
    }
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let label = match row.s {
            Some(s) => format!("{} s={s}", row.family),
            None => row.family.clone(),
        };
        let point = (row.n as f64, row.mean, row.stderr);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(Series { label, points: vec![point] }),
        }
    }
    std::fs::write(path, line_plot(&series, "n", "statistical dimension"))?;
    Ok(())
}

pub fn line_plot(series: &[Series], xlabel: &str, ylabel: &str) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y, e) in pts {
        let e = if e.is_finite() { e } else { 0.0 };
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y - e);
        y1 = y1.max(y + e);
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
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = header();
    axes(&mut svg, xlabel, ylabel, (x0, x1), (y0, y1));
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for &(x, y, e) in s.points.iter().filter(|p| p.1.is_finite()) {
            let e = if e.is_finite() { e } else { 0.0 };
            let _ = writeln!(
                svg,
                r#"<line class="errorbar" x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="{color}"/>"#,
                sx(x),
                sy(y - e),
                sy(y + e)
            );
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.0}" y="{:.0}" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 5.0,
            MARGIN + 14.0 * i as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Heatmap of success rates, one cell per `(m, s)` bin; rows are `s`, columns `m`.
pub fn emit_phase_svg(rows: &[PhaseRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(ExpError::Config("no rows to plot".into()));
    }
    std::fs::write(path, heatmap(rows))?;
    Ok(())
}

pub fn heatmap(rows: &[PhaseRow]) -> String {
    let ms: Vec<usize> = rows.iter().map(|r| r.m).collect::<BTreeSet<_>>().into_iter().collect();
    let ss: Vec<usize> = rows.iter().map(|r| r.s).collect::<BTreeSet<_>>().into_iter().collect();
    let cw = (WIDTH - 2.0 * MARGIN) / ms.len() as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / ss.len() as f64;
    let mut svg = header();
    for row in rows {
        let i = ms.binary_search(&row.m).expect("m present");
        let j = ss.binary_search(&row.s).expect("s present");
        let rate = if row.trials > 0 { row.successes as f64 / row.trials as f64 } else { 0.0 };
        let g = (255.0 * rate).round() as u8;
        let _ = writeln!(
            svg,
            r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"><title>m={} s={} {}/{}</title></rect>"#,
            MARGIN + i as f64 * cw,
            HEIGHT - MARGIN - (j + 1) as f64 * ch,
            cw,
            ch,
            row.m,
            row.s,
            row.successes,
            row.trials
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.0}" y="{:.0}" font-size="12" text-anchor="middle">m ({}..{})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        ms[0],
        ms[ms.len() - 1]
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.0}" font-size="12" transform="rotate(-90 20 {:.0})" text-anchor="middle">s ({}..{})</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        ss[0],
        ss[ss.len() - 1]
    );
    svg.push_str("</svg>\n");
    svg
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn axes(svg: &mut String, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<text x="{l}" y="{:.0}" font-size="11">{:.3}</text>"#, b + 15.0, x.0);
    let _ = writeln!(svg, r#"<text x="{r}" y="{:.0}" font-size="11" text-anchor="end">{:.3}</text>"#, b + 15.0, x.1);
    let _ = writeln!(svg, r#"<text x="{:.0}" y="{b}" font-size="11" text-anchor="end">{:.3}</text>"#, l - 5.0, y.0);
    let _ = writeln!(svg, r#"<text x="{:.0}" y="{t}" font-size="11" text-anchor="end">{:.3}</text>"#, l - 5.0, y.1);
    let _ = writeln!(
        svg,
        r#"<text x="{:.0}" y="{:.0}" font-size="12" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{0:.0}" font-size="12" transform="rotate(-90 15 {0:.0})" text-anchor="middle">{1}</text>"#,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
