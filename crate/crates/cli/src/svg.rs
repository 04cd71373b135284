//! Static single-file SVG figures, no external assets.

use std::fmt::Write;

use pathgap_core::constants::{heat_a, lambda_fn};
use pathgap_core::InequalityReport;

use crate::output::ConstantsRow;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, y_max: f64) {
    let _ = writeln!(
        out,
        "<line x1=\"{PAD}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{y0}\" stroke=\"black\"/>\
         <text x=\"{tx}\" y=\"{ty}\" text-anchor=\"end\">{y_max:.3}</text>\
         <text x=\"{tx}\" y=\"{y0}\" text-anchor=\"end\">0</text>",
        y0 = H - PAD,
        x1 = W - PAD,
        tx = PAD - 4.0,
        ty = PAD + 4.0,
    );
}

/// Bars of `lhs` and `rhs` per link with `±3 SE` whiskers.
pub fn report_bars(report: &InequalityReport) -> String {
    let mut out = String::new();
    open(&mut out, &format!("{} ({:?})", report.scenario, report.verdict));
    let top = report
        .links
        .iter()
        .flat_map(|l| [l.lhs.value + 3.0 * l.lhs.std_error, l.rhs.value + 3.0 * l.rhs.std_error])
        .fold(0.0f64, f64::max)
        .max(1e-12);
    axes(&mut out, top);
    let n = report.links.len().max(1) as f64;
    let slot = (W - 2.0 * PAD) / n;
    let scale = (H - 2.0 * PAD) / top;
    for (i, l) in report.links.iter().enumerate() {
        let x0 = PAD + i as f64 * slot + slot * 0.15;
        let bw = slot * 0.3;
        for (j, (e, color)) in [(l.lhs, COLORS[0]), (l.rhs, COLORS[1])].iter().enumerate() {
            let x = x0 + j as f64 * bw;
            let h = e.value.max(0.0) * scale;
            let y = H - PAD - h;
            let _ = writeln!(out, "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bw:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>");
            let (lo, hi) = ((e.value - 3.0 * e.std_error).max(0.0), e.value + 3.0 * e.std_error);
            let cx = x + bw / 2.0;
            let _ = writeln!(
                out,
                "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                H - PAD - lo * scale,
                H - PAD - hi * scale
            );
        }
        let opacity = if l.binding { 1.0 } else { 0.55 };
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" opacity=\"{opacity}\" font-size=\"9\">{}</text>",
            x0 + bw,
            H - PAD + 14.0,
            escape(&l.name)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" fill=\"{}\">lhs</text><text x=\"{}\" y=\"{}\" fill=\"{}\">rhs</text>",
        W - PAD - 60.0,
        PAD,
        COLORS[0],
        W - PAD - 30.0,
        PAD,
        COLORS[1]
    );
    out.push_str("</svg>\n");
    out
}

fn polyline(out: &mut String, pts: &[(f64, f64)], x_max: f64, y_max: f64, color: &str) {
    let sx = (W - 2.0 * PAD) / x_max;
    let sy = (H - 2.0 * PAD) / y_max;
    let body: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", PAD + x * sx, H - PAD - y * sy)).collect();
    let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", body.join(" "));
}

/// `t ↦ Λ(t,T)` for the first rows of a constants table, and `s ↦ A(s)`
/// with `K = K₂` dashed.
pub fn constants_curves(rows: &[ConstantsRow]) -> String {
    const SHOWN: usize = 6;
    const POINTS: usize = 200;
    let rows = &rows[..rows.len().min(SHOWN)];
    let mut out = String::new();
    open(&mut out, "Lambda(t,T) (solid) and A(s) (dashed)");
    let x_max = rows.iter().map(|r| r.horizon).fold(1e-12, f64::max);
    let curves: Vec<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = rows
        .iter()
        .map(|r| {
            let ts = (0..=POINTS).map(|i| r.horizon * i as f64 / POINTS as f64);
            let lam = ts.clone().map(|t| (t, lambda_fn(t, r.horizon, r.k1, r.k2))).collect();
            let a = ts.map(|s| (s, heat_a(s, r.horizon, r.k2))).collect();
            (lam, a)
        })
        .collect();
    let y_max = curves.iter().flat_map(|(l, a)| l.iter().chain(a).map(|p| p.1)).filter(|v| v.is_finite()).fold(1e-12, f64::max);
    axes(&mut out, y_max);
    for (i, ((lam, a), r)) in curves.iter().zip(rows).enumerate() {
        let c = COLORS[i % COLORS.len()];
        polyline(&mut out, lam, x_max, y_max, c);
        let mut dashed = String::new();
        polyline(&mut dashed, a, x_max, y_max, c);
        out.push_str(&dashed.replace("stroke-width", "stroke-dasharray=\"4 3\" stroke-width"));
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"{c}\">K1={} K2={} T={}</text>",
            PAD + 8.0,
            PAD + 14.0 * (i as f64 + 1.0),
            r.k1,
            r.k2,
            r.horizon
        );
    }
    out.push_str("</svg>\n");
    out
}
