//! Static SVG line charts of summary metrics against the group size.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;

use super::runner::SummaryRow;

/// File stem, axis label, accessor.
pub type Metric = (&'static str, &'static str, fn(&SummaryRow) -> f64);

pub const METRICS: [Metric; 4] = [
    ("avg_mue_utility", "Average MUE utility", |r| r.avg_mue_utility),
    ("avg_sue_utility", "Average SUE utility", |r| r.avg_sue_utility),
    ("avg_scb_utility", "Average SCB utility", |r| r.avg_scb_utility),
    ("social_welfare", "Social welfare", |r| r.social_welfare),
];

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Mechanisms in first-appearance order, each with its `(n_i, value)` points
/// sorted by `n_i`.
fn series(rows: &[SummaryRow], metric: fn(&SummaryRow) -> f64) -> Vec<(Mechanism, Vec<(usize, f64)>)> {
    let mut out: Vec<(Mechanism, Vec<(usize, f64)>)> = Vec::new();
    for r in rows {
        let pt = (r.n_i, metric(r));
        match out.iter_mut().find(|(m, _)| *m == r.mechanism) {
            Some((_, pts)) => pts.push(pt),
            None => out.push((r.mechanism, vec![pt])),
        }
    }
    for (_, pts) in &mut out {
        pts.sort_by_key(|p| p.0);
    }
    out
}

pub fn render_svg(rows: &[SummaryRow], title: &str, metric: fn(&SummaryRow) -> f64) -> String {
    let lines = series(rows, metric);
    let xs = lines.iter().flat_map(|(_, p)| p.iter().map(|q| q.0 as f64));
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let ys = lines.iter().flat_map(|(_, p)| p.iter().map(|q| q.1));
    let (mut y_lo, mut y_hi) = ys.fold((0.0f64, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    y_lo = y_lo.min(0.0);
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let px = |x: f64| LEFT + (x - x_lo) / x_span * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y_lo) / (y_hi - y_lo) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    let _ = writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            LEFT - 6.0,
            py(y) + 4.0,
            y
        );
    }
    let mut ticks: Vec<usize> = lines.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for n in ticks {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{n}</text>"#, px(n as f64), y0 + 16.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Number of MUEs per group</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0
    );

    for (idx, (mech, pts)) in lines.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(n, v)| format!("{:.2},{:.2}", px(n as f64), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<g class="series" data-mechanism="{mech}"><polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(n, v) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" data-n="{n}" data-value="{v:?}"/>"#,
                px(n as f64),
                py(v)
            );
        }
        let ly = TOP + 20.0 * idx as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{mech}</text></g>"#,
            x1 + 15.0,
            x1 + 35.0,
            x1 + 40.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes one chart per metric into `out_dir`. An empty summary writes
/// nothing and logs a warning.
pub fn emit_plots(rows: &[SummaryRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        log::warn!("no summary rows to plot");
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    METRICS
        .iter()
        .map(|&(stem, title, metric)| {
            let path = out_dir.join(format!("{stem}.svg"));
            std::fs::write(&path, render_svg(rows, title, metric)).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(m: Mechanism, n: usize, v: f64) -> SummaryRow {
        SummaryRow {
            mechanism: m,
            n_i: n,
            repetitions: 1,
            avg_mue_utility: v,
            avg_sue_utility: v,
            avg_scb_utility: v,
            social_welfare: v,
        }
    }

    #[test]
    fn one_group_per_series() {
        let rows: Vec<_> = [10, 20]
            .into_iter()
            .flat_map(|n| [row(Mechanism::Tarco, n, 1.0), row(Mechanism::Vita, n, 2.0)])
            .collect();
        let svg = render_svg(&rows, "t", |r| r.social_welfare);
        assert_eq!(svg.matches(r#"class="series""#).count(), 2);
        assert_eq!(svg.matches("<circle").count(), 4);
    }

    #[test]
    fn flat_series_still_renders() {
        let svg = render_svg(&[row(Mechanism::Rnd, 10, 0.0)], "t", |r| r.social_welfare);
        assert!(!svg.contains("NaN"));
    }
}
