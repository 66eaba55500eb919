//! Bar charts of a final state vector.

use std::fmt::Write as _;

use yeastloc_core::{Compartment, StateVector};

pub const ASCII_WIDTH: usize = 50;
pub const SVG_WIDTH: u32 = 500;
pub const SVG_HEIGHT: u32 = 200;

pub fn bar_len(p: f64) -> usize {
    (p * ASCII_WIDTH as f64)
        .round()
        .clamp(0.0, ASCII_WIDTH as f64) as usize
}

/// Five rows, `#` bars scaled to 50 columns, `*` on the most probable row.
pub fn ascii(s: &StateVector) -> String {
    let best = s.argmax();
    let mut out = String::new();
    for c in Compartment::ALL {
        let p = s[c];
        let bar = "#".repeat(bar_len(p));
        let mark = if c == best { " *" } else { "" };
        let _ = writeln!(out, "{c} |{bar:<ASCII_WIDTH$}| {p:.3}{mark}");
    }
    out
}

pub fn svg(s: &StateVector, title: &str) -> String {
    const ROW: u32 = 32;
    const TOP: u32 = 30;
    const LEFT: u32 = 40;
    const BAR_MAX: f64 = 380.0;
    let best = s.argmax();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"  <text x="10" y="18" font-family="monospace" font-size="14">{}</text>"#,
        escape(title)
    );
    for (i, c) in Compartment::ALL.into_iter().enumerate() {
        let y = TOP + i as u32 * ROW;
        let p = s[c];
        let fill = if c == best { "#c0392b" } else { "#2c7fb8" };
        let _ = writeln!(
            out,
            r#"  <text x="10" y="{}" font-family="monospace" font-size="14">{c}</text>"#,
            y + 18
        );
        let _ = writeln!(
            out,
            r#"  <rect x="{LEFT}" y="{y}" width="{:.1}" height="24" fill="{fill}"><title>{}</title></rect>"#,
            p * BAR_MAX,
            c.description()
        );
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-family="monospace" font-size="12">{p:.3}</text>"#,
            LEFT + BAR_MAX as u32 + 8,
            y + 17
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
