use crate::group::OrbitBall;
use crate::mobius::ChartBall;
use std::fmt::Write as _;

/// Stroke colours by depth; depth `d ≥ 1` uses entry `(d - 1) % len`.
pub const DEPTH_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgWindow {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    /// Pixels per chart unit.
    pub scale: f64,
}

/// Chart picture of orbit balls (n = 2): one element with class
/// `orbit-ball` per ball, stroked by depth, plus a legend.
pub fn render(balls: &[OrbitBall<f64>], w: &SvgWindow) -> String {
    let width = (w.x1 - w.x0) * w.scale;
    let height = (w.y1 - w.y0) * w.scale;
    let px = |x: f64| (x - w.x0) * w.scale;
    let py = |y: f64| (w.y1 - y) * w.scale;
    let max_depth = balls.iter().map(|b| b.depth()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<g fill="none" stroke-width="1">"#);
    for b in balls {
        let color = DEPTH_COLORS[(b.depth().max(1) - 1) % DEPTH_COLORS.len()];
        let word = b.word.to_string();
        match b.cap.to_chart() {
            ChartBall::Disk { center, radius } | ChartBall::Exterior { center, radius } => {
                let _ = writeln!(
                    out,
                    r#"<circle class="orbit-ball" data-word="{word}" data-depth="{}" cx="{:.6}" cy="{:.6}" r="{:.6}" stroke="{color}"/>"#,
                    b.depth(),
                    px(center[0]),
                    py(center[1]),
                    radius * w.scale
                );
            }
            ChartBall::HalfSpace { normal, offset } => {
                // Boundary line {⟨x, normal⟩ = offset}, drawn across the window.
                let base = [normal[0] * offset, normal[1] * offset];
                let dir = [-normal[1], normal[0]];
                let reach = (w.x1 - w.x0).abs() + (w.y1 - w.y0).abs() + base[0].abs() + base[1].abs();
                let _ = writeln!(
                    out,
                    r#"<line class="orbit-ball" data-word="{word}" data-depth="{}" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{color}"/>"#,
                    b.depth(),
                    px(base[0] - reach * dir[0]),
                    py(base[1] - reach * dir[1]),
                    px(base[0] + reach * dir[0]),
                    py(base[1] + reach * dir[1])
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for d in 1..=max_depth.min(DEPTH_COLORS.len()) {
        let y = 16.0 * d as f64;
        let _ = writeln!(
            out,
            r#"<line x1="8" y1="{:.1}" x2="28" y2="{:.1}" stroke="{}" stroke-width="2"/><text x="34" y="{:.1}">depth {}{}</text>"#,
            y - 4.0,
            y - 4.0,
            DEPTH_COLORS[d - 1],
            y,
            d,
            if max_depth > DEPTH_COLORS.len() && d == DEPTH_COLORS.len() {
                format!(" (+{}k)", DEPTH_COLORS.len())
            } else {
                String::new()
            }
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
