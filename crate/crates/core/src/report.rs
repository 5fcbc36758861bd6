//! Panorama SVG of the unique windows on the facade plane.

use std::fmt::Write;

use crate::error::Result;
use crate::plane_map::{count_storeys, MetricsDocument};

/// Drawing scale.
pub const PX_PER_M: f64 = 40.0;
const PAD_PX: f64 = 24.0;
const LABEL_H_PX: f64 = 28.0;

/// Renders the metrics document as an SVG panorama: one `class="window"`
/// rectangle per unique window (plane y points up, so it is flipped),
/// dashed guides at each storey band's bottom and top, and `W=n S=n`.
pub fn render_panorama(doc: &MetricsDocument, band_overlap_min: f64) -> Result<String> {
    let boxes: Vec<_> = doc.unique_windows.iter().map(|w| w.to_plane_box()).collect();
    let storeys = count_storeys(&boxes, band_overlap_min)?;

    let (x0, y0, x1, y1) = if boxes.is_empty() {
        (0.0, 0.0, 4.0, 1.0)
    } else {
        boxes.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), w| (a.min(w.x_m), b.min(w.y_m), c.max(w.x_m + w.w_m), d.max(w.top_m())),
        )
    };
    let width = (x1 - x0) * PX_PER_M + 2.0 * PAD_PX;
    let plot_h = (y1 - y0) * PX_PER_M;
    let height = plot_h + 2.0 * PAD_PX + LABEL_H_PX;
    let sx = |x: f64| PAD_PX + (x - x0) * PX_PER_M;
    let sy = |y: f64| LABEL_H_PX + PAD_PX + (y1 - y) * PX_PER_M;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect class="background" x="0" y="0" width="{width:.1}" height="{height:.1}" fill="#f4f1ea"/>"##
    );
    for (i, band) in storeys.bands.iter().enumerate() {
        for y in [band.lo_m, band.hi_m] {
            let _ = writeln!(
                s,
                r##"<line class="storey-guide" x1="0" y1="{y:.2}" x2="{width:.1}" y2="{y:.2}" stroke="#8a8a8a" stroke-dasharray="4 3"/>"##,
                y = sy(y)
            );
        }
        let _ = writeln!(
            s,
            r##"<text class="storey-label" x="4" y="{:.2}" font-family="monospace" font-size="11" fill="#555">S{}</text>"##,
            sy((band.lo_m + band.hi_m) / 2.0) + 4.0,
            i + 1
        );
    }
    for w in &boxes {
        let _ = writeln!(
            s,
            r##"<rect class="window" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#5b7fa6" stroke="#223" stroke-width="1"/>"##,
            sx(w.x_m),
            sy(w.top_m()),
            w.w_m * PX_PER_M,
            w.h_m * PX_PER_M
        );
    }
    let _ = writeln!(
        s,
        r##"<text class="counts" x="{PAD_PX}" y="20" font-family="monospace" font-size="16" fill="#111">W={} S={}</text>"##,
        doc.window_count, doc.storey_count
    );
    s.push_str("</svg>\n");
    Ok(s)
}
