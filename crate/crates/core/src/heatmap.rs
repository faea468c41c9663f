//! Grayscale rendering of sustainability fields as plain PGM.

use std::fmt::Write as _;

use crate::sustainability::SustainabilityField;

pub const MASKED: u8 = 0;
pub const BOUNDARY: u8 = 64;
pub const SHADED: u8 = 128;
pub const CLEAR: u8 = 255;

/// Pixel values, top row first (largest `r²(0)` at the top).
pub fn heatmap_pixels(field: &SustainabilityField, threshold: f64) -> Vec<u8> {
    let m = field.side();
    let half = 0.5 * field.spec.grid_step;
    let mut px = Vec::with_capacity(m * m);
    for row in (0..m).rev() {
        let r2 = field.axis[row];
        for col in 0..m {
            let r1 = field.axis[col];
            let radius = (r1 * r1 + r2 * r2).sqrt();
            let v = if (radius - 1.0).abs() < half {
                BOUNDARY
            } else {
                match field.get(row, col) {
                    None => MASKED,
                    Some(a) if a < threshold => SHADED,
                    Some(_) => CLEAR,
                }
            };
            px.push(v);
        }
    }
    px
}

/// Plain-text (`P2`) grayscale image with maximum value 255.
pub fn render_heatmap(field: &SustainabilityField, threshold: f64) -> String {
    let m = field.side();
    let px = heatmap_pixels(field, threshold);
    let mut out = format!("P2\n{m} {m}\n255\n");
    for row in px.chunks(m) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
