//! Standalone SVG charts: a log-log line chart for scaling scans and a
//! histogram for coupon-collector draw counts.

use std::fmt::Write;

use epsrand_core::experiments::{CouponRecord, ScalingRecord};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
/// `(N, mean, standard error)` points of one dimension.
type Series = (usize, Vec<(f64, f64, f64)>);

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        escape(ylabel)
    );
}

fn axes(out: &mut String) {
    let _ = writeln!(
        out,
        r##"<path d="M{l} {t} V{b} H{r}" fill="none" stroke="#333"/>"##,
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
        r = WIDTH - MARGIN_RIGHT
    );
}

/// Decade ticks for a log10 axis range.
fn decades(lo: f64, hi: f64) -> Vec<i32> {
    (lo.floor() as i32..=hi.ceil() as i32).collect()
}

/// Mean `M-hat` against `N` on log-log axes, one polyline per `d`, with
/// one-standard-error bars.
pub fn scaling_svg(record: &ScalingRecord) -> String {
    let mut series: Vec<Series> = Vec::new();
    for &d in &record.params.d_list {
        if series.iter().any(|(sd, _)| *sd == d) {
            continue;
        }
        let pts: Vec<(f64, f64, f64)> = record
            .cells
            .iter()
            .filter(|c| c.d == d)
            .filter_map(|c| c.summary.map(|s| (c.n as f64, s.mean, s.standard_error)))
            .filter(|&(_, m, _)| m > 0.0)
            .collect();
        if !pts.is_empty() {
            series.push((d, pts));
        }
    }

    let mut out = String::new();
    header(
        &mut out,
        &format!("sup-norm deviation vs N ({})", record.params.ensemble),
        "N (log scale)",
        "mean estimate (log scale)",
    );
    let all: Vec<&(f64, f64, f64)> = series.iter().flat_map(|(_, p)| p).collect();
    if all.is_empty() {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#, WIDTH / 2.0, HEIGHT / 2.0);
        out.push_str("</svg>\n");
        return out;
    }
    let lx: Vec<f64> = all.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = all.iter().map(|p| p.1.log10()).collect();
    let fold = |v: &[f64], init: f64, op: fn(f64, f64) -> f64| v.iter().copied().fold(init, op);
    let frame = Frame::new(
        fold(&lx, f64::INFINITY, f64::min) - 0.1,
        fold(&lx, f64::NEG_INFINITY, f64::max) + 0.1,
        fold(&ly, f64::INFINITY, f64::min) - 0.2,
        fold(&ly, f64::NEG_INFINITY, f64::max) + 0.2,
    );
    axes(&mut out);
    for e in decades(frame.x0, frame.x1) {
        let x = frame.px(e as f64);
        if (MARGIN_LEFT..=WIDTH - MARGIN_RIGHT).contains(&x) {
            let _ = writeln!(
                out,
                r##"<line x1="{x:.1}" y1="{b}" x2="{x:.1}" y2="{t}" stroke="#ddd"/><text x="{x:.1}" y="{ty}" text-anchor="middle">1e{e}</text>"##,
                b = HEIGHT - MARGIN_BOTTOM,
                t = MARGIN_TOP,
                ty = HEIGHT - MARGIN_BOTTOM + 16.0
            );
        }
    }
    for e in decades(frame.y0, frame.y1) {
        let y = frame.py(e as f64);
        if (MARGIN_TOP..=HEIGHT - MARGIN_BOTTOM).contains(&y) {
            let _ = writeln!(
                out,
                r##"<line x1="{l}" y1="{y:.1}" x2="{r}" y2="{y:.1}" stroke="#ddd"/><text x="{tx}" y="{y:.1}" text-anchor="end" dy="4">1e{e}</text>"##,
                l = MARGIN_LEFT,
                r = WIDTH - MARGIN_RIGHT,
                tx = MARGIN_LEFT - 6.0
            );
        }
    }
    for (k, (d, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(n, m, _)| format!("{:.1},{:.1}", frame.px(n.log10()), frame.py(m.log10())))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(n, m, se) in pts {
            let x = frame.px(n.log10());
            let lo = (m - se).max(m * 1e-3);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{color}"/><circle cx="{x:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                frame.py(lo.log10()),
                frame.py((m + se).log10()),
                frame.py(m.log10())
            );
        }
        let slope = record
            .fit(*d)
            .map(|f| format!(", slope {:.3}", f.slope))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">d = {d}{slope}</text>"#,
            WIDTH - MARGIN_RIGHT - 150.0,
            MARGIN_TOP + 16.0 * (k as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram of draw counts with the analytic mean marked.
pub fn coupon_svg(record: &CouponRecord) -> String {
    let mut out = String::new();
    header(
        &mut out,
        &format!("draws until full rank, d = {}", record.params.d),
        "draws",
        "trials",
    );
    let lo = record.draws.iter().copied().min().unwrap_or(0) as f64;
    let hi = record.draws.iter().copied().max().unwrap_or(1) as f64;
    let bins = ((record.draws.len() as f64).sqrt().ceil() as usize).clamp(1, 60);
    let width = ((hi - lo) / bins as f64).max(1.0);
    let mut counts = vec![0usize; bins];
    for &x in &record.draws {
        let b = (((x as f64 - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let frame = Frame::new(lo, lo + width * bins as f64, 0.0, top * 1.1);
    axes(&mut out);
    for (b, &c) in counts.iter().enumerate() {
        let x0 = frame.px(lo + b as f64 * width);
        let x1 = frame.px(lo + (b + 1) as f64 * width);
        let y = frame.py(c as f64);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="#1f77b4" stroke="white"/>"##,
            (x1 - x0).max(0.5),
            frame.py(0.0) - y
        );
    }
    for (value, label, color) in [
        (record.analytic_mean, "d H_d", "#d62728"),
        (record.summary.mean, "mean", "#2ca02c"),
    ] {
        let x = frame.px(value);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="{color}" stroke-dasharray="4 3"/><text x="{:.1}" y="{}" fill="{color}">{label} = {value:.1}</text>"#,
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM,
            x + 4.0,
            MARGIN_TOP + if label == "mean" { 28.0 } else { 12.0 }
        );
    }
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.0}</text>"#,
            frame.px(v),
            HEIGHT - MARGIN_BOTTOM + 16.0,
            v
        );
    }
    out.push_str("</svg>\n");
    out
}
