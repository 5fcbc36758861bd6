//! Render a metrics document as a panorama SVG.

use facade_survey::geometry::PlaneBox;
use facade_survey::plane_map::{area_ratio, count_storeys, FacadeExtent, FacadeMetrics};
use facade_survey::report::render_panorama;

fn main() -> facade_survey::Result<()> {
    let mut windows = Vec::new();
    for storey in 0..3 {
        for k in 0..4 {
            windows.push(PlaneBox {
                x_m: 1.0 + 2.5 * k as f64,
                y_m: 1.0 + 3.0 * storey as f64,
                w_m: 1.2,
                h_m: 1.5,
                score: 1.0,
                source_frames: vec![format!("frame_{storey:03}")],
            });
        }
    }
    let extent = FacadeExtent { x_m: 0.0, y_m: 0.0, w_m: 11.0, h_m: 10.0 };
    let storeys = count_storeys(&windows, 0.5)?;
    let metrics = FacadeMetrics {
        window_count: windows.len(),
        storey_count: storeys.storey_count,
        windows_per_storey: storeys.windows_per_storey.clone(),
        area_ratio: area_ratio(&windows, &extent)?,
        facade_extent: Some(extent),
        unique_windows: windows,
        storeys,
    };
    let svg = render_panorama(&metrics.to_document(), 0.5)?;
    let out = std::env::temp_dir().join("facade-panorama.svg");
    std::fs::write(&out, &svg).expect("write svg");
    println!("area ratio {:.4}; {} bytes written to {}", metrics.area_ratio, svg.len(), out.display());
    Ok(())
}
