use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{FacadeLayout, FlightPlan, WindowId};
use crate::ingest::GrayImage;

/// Frame and mullion width as a fraction of the window's smaller side.
const FRAME_FRACTION: f64 = 0.1;

/// Draws one frame. `windows` holds each window's pixel rectangle as
/// `[left, top, right, bottom]`; partial pixel coverage is blended so
/// sub-pixel positions render consistently. Output values are whole gray
/// levels.
pub fn render_frame(
    layout: &FacadeLayout,
    plan: &FlightPlan,
    windows: &[(WindowId, [f64; 4])],
    rng: &mut ChaCha8Rng,
) -> GrayImage {
    let (w, h) = (plan.camera.width_px as usize, plan.camera.height_px as usize);
    let mut canvas = vec![f64::from(layout.wall_intensity); w * h];
    let frame_val = f64::from(layout.wall_intensity + layout.window_intensity) / 2.0;

    for (id, [l, t, r, b]) in windows {
        if *r <= 0.0 || *b <= 0.0 || *l >= w as f64 || *t >= h as f64 {
            continue;
        }
        let glass =
            f64::from(layout.window_intensity + id.storey as f32 * layout.storey_intensity_step);
        let k = FRAME_FRACTION * (r - l).min(b - t);
        fill(&mut canvas, w, h, [*l, *t, *r, *b], frame_val);
        fill(&mut canvas, w, h, [l + k, t + k, r - k, b - k], glass);
        let cx = (l + r) / 2.0;
        fill(&mut canvas, w, h, [cx - k / 2.0, t + k, cx + k / 2.0, b - k], frame_val);
        let ty = t + (b - t) / 3.0;
        fill(&mut canvas, w, h, [l + k, ty - k / 2.0, r - k, ty + k / 2.0], frame_val);
    }

    let noise = i32::from(plan.render_noise);
    let data = canvas
        .into_iter()
        .map(|v| {
            let n = if noise > 0 {
                rng.gen_range(-noise..=noise)
            } else {
                0
            };
            (v.round() + f64::from(n)).clamp(0.0, 255.0) as f32
        })
        .collect();
    GrayImage::new(w, h, data).expect("canvas size")
}

/// Paints `value` over the rectangle, weighting each pixel by the fraction
/// of its area the rectangle covers.
fn fill(canvas: &mut [f64], w: usize, h: usize, [l, t, r, b]: [f64; 4], value: f64) {
    if r <= l || b <= t {
        return;
    }
    let x0 = l.floor().max(0.0) as usize;
    let x1 = (r.ceil().max(0.0) as usize).min(w);
    let y0 = t.floor().max(0.0) as usize;
    let y1 = (b.ceil().max(0.0) as usize).min(h);
    for y in y0..y1 {
        let cy = (b.min(y as f64 + 1.0) - t.max(y as f64)).max(0.0);
        for x in x0..x1 {
            let cx = (r.min(x as f64 + 1.0) - l.max(x as f64)).max(0.0);
            let c = cx * cy;
            let px = &mut canvas[y * w + x];
            *px = *px * (1.0 - c) + value * c;
        }
    }
}
