//! Plain SVG plots: eigenvalue scatter over the unit circle, radial CDF curves.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rmlab_core::measures::{Domain, EmpiricalMeasure};
use rmlab_core::{LabError, Result};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Square plot frame from data coordinates to pixels.
struct Frame {
    half: f64,
}

impl Frame {
    fn scale(&self) -> f64 {
        (SIZE - 2.0 * MARGIN) / (2.0 * self.half)
    }
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v + self.half) * self.scale()
    }
    fn y(&self, v: f64) -> f64 {
        MARGIN + (self.half - v) * self.scale()
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
}

/// Scatter of `points` with axes and the unit circle.
///
/// The window is `[−1.5, 1.5]²`, widened when a point falls outside it so that
/// every marker is drawn.
pub fn scatter_svg(points: &[Complex64]) -> Result<String> {
    if points.is_empty() {
        return Err(LabError::invalid("measure", "cannot plot an empty measure"));
    }
    if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::invalid("measure", "atoms must be finite"));
    }
    let extent = points.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    let f = Frame {
        half: if extent > 1.5 { extent * 1.05 } else { 1.5 },
    };
    let mut out = String::new();
    header(&mut out);
    let (x0, x1, y0) = (f.x(-f.half), f.x(f.half), f.y(0.0));
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="gray"/>"#
    );
    let (xm, ya, yb) = (f.x(0.0), f.y(f.half), f.y(-f.half));
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{xm:.2}" y1="{ya:.2}" x2="{xm:.2}" y2="{yb:.2}" stroke="gray"/>"#
    );
    let _ = writeln!(
        out,
        r#"<circle class="unit-circle" cx="{xm:.2}" cy="{y0:.2}" r="{:.2}" fill="none" stroke="red"/>"#,
        f.scale()
    );
    let _ = writeln!(out, r##"<g fill="#1f4e9c">"##);
    for z in points {
        let _ = writeln!(
            out,
            r#"<circle class="atom" cx="{:.2}" cy="{:.2}" r="1.5"/>"#,
            f.x(z.re),
            f.y(z.im)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn emit_scatter_svg(measure: &EmpiricalMeasure, path: &Path) -> Result<()> {
    if measure.domain() != Domain::ComplexPlane {
        return Err(LabError::invalid("measure", "scatter needs a measure on the complex plane"));
    }
    let points: Vec<Complex64> = measure.positions().collect();
    rmlab_core::io::write_bytes(path, scatter_svg(&points)?.as_bytes())
}

/// Empirical `F̂(r) = ν(|λ| ≤ r)` against the disc law `r²` on `[0, 1.2]`.
pub fn radial_svg(points: &[Complex64]) -> Result<String> {
    if points.is_empty() {
        return Err(LabError::invalid("measure", "cannot plot an empty measure"));
    }
    let mut radii: Vec<f64> = points.iter().map(|z| z.norm()).collect();
    radii.sort_by(f64::total_cmp);
    let r_max = 1.2;
    let w = SIZE - 2.0 * MARGIN;
    let px = |r: f64| MARGIN + r / r_max * w;
    let py = |f: f64| SIZE - MARGIN - f * w;
    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{MARGIN}" y1="{b}" x2="{e}" y2="{b}" stroke="gray"/>"#,
        b = SIZE - MARGIN,
        e = SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{MARGIN}" y1="{b}" x2="{MARGIN}" y2="{MARGIN}" stroke="gray"/>"#,
        b = SIZE - MARGIN
    );
    let steps = 240;
    let mut theory = String::new();
    let mut empirical = String::new();
    let total = radii.len() as f64;
    for i in 0..=steps {
        let r = r_max * i as f64 / steps as f64;
        let inside = radii.partition_point(|&x| x <= r) as f64 / total;
        let _ = write!(theory, "{:.2},{:.2} ", px(r), py((r * r).min(1.0)));
        let _ = write!(empirical, "{:.2},{:.2} ", px(r), py(inside));
    }
    let _ = writeln!(
        out,
        r#"<polyline class="theory" points="{}" fill="none" stroke="red"/>"#,
        theory.trim_end()
    );
    let _ = writeln!(
        out,
        r##"<polyline class="empirical" points="{}" fill="none" stroke="#1f4e9c"/>"##,
        empirical.trim_end()
    );
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_radial_svg(measure: &EmpiricalMeasure, path: &Path) -> Result<()> {
    let points: Vec<Complex64> = measure.positions().collect();
    rmlab_core::io::write_bytes(path, radial_svg(&points)?.as_bytes())
}
