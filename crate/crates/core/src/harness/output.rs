//! Plain-text artifact writers: SVG convergence plots and binary PGM images.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
// values below this are drawn at the floor of the log axis
const LOG_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(x, y)` with `y > 0`, drawn on a log₁₀ axis.
    pub points: Vec<(f64, f64)>,
}

fn nice_step(range: f64, target_ticks: usize) -> f64 {
    let raw = range / target_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Self-contained SVG with one polyline per series, x linear, y log₁₀.
pub fn convergence_svg(title: &str, series: &[Series]) -> String {
    let (w, h) = (760.0, 480.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let all = series.iter().flat_map(|s| s.points.iter());
    let x_max = all.clone().map(|p| p.0).fold(0.0, f64::max).max(1.0);
    let logs = all.map(|p| p.1.max(LOG_FLOOR).log10());
    let (lo, hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (mut y_lo, mut y_hi) = if lo.is_finite() {
        (lo.floor(), hi.ceil())
    } else {
        (-1.0, 0.0)
    };
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    y_lo = y_lo.min(y_hi - 1.0);

    let sx = |x: f64| left + x / x_max * pw;
    let sy = |ly: f64| top + (y_hi - ly) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let decades = (y_hi - y_lo) as usize;
    let every = decades.div_ceil(10).max(1);
    for d in (0..=decades).step_by(every) {
        let ly = y_lo + d as f64;
        let y = sy(ly);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0,
            ly as i64
        );
    }
    let step = nice_step(x_max, 6);
    let mut x = 0.0;
    while x <= x_max + 1e-9 {
        let px = sx(x);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 18.0,
            x
        );
        x += step;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">reflections</text>"#,
        left + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">ERR</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y.max(LOG_FLOOR).log10())))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 20.0 + 20.0 * k as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Binary (P5) 8-bit PGM of an `n × n` image with pixel index `row·n + col`
/// and row 0 at the bottom. Values are clamped to `[0, 1]` and scaled to 255.
pub fn pgm_bytes(image: &[f64], n: usize) -> Result<Vec<u8>> {
    if image.len() != n * n {
        return Err(Error::arg(format!(
            "image has {} pixels, expected {n}²",
            image.len()
        )));
    }
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for r in (0..n).rev() {
        for &v in &image[r * n..(r + 1) * n] {
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            out.push((v * 255.0).round() as u8);
        }
    }
    Ok(out)
}

pub fn write_pgm(path: impl AsRef<Path>, image: &[f64], n: usize) -> Result<()> {
    fs::write(path, pgm_bytes(image, n)?)?;
    Ok(())
}
