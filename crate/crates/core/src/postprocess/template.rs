use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::ingest::GrayImage;

/// In-plane rotations applied to every seed patch, degrees.
pub const ROTATIONS_DEG: [f64; 3] = [-2.5, 0.0, 2.5];

/// Seeds smaller than this on either side are skipped.
pub const MIN_TEMPLATE_PX: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub pixels: GrayImage,
    pub rotation_deg: f64,
    pub origin_box: PixelBox,
}

/// Three templates (`-2.5`, `0`, `+2.5` degrees) per usable detection, plus a
/// warning for every detection that was too small to cut a patch from.
pub fn extract_templates(
    image: &GrayImage,
    detections: &[PixelBox],
) -> Result<(Vec<Template>, Vec<String>)> {
    if detections.is_empty() {
        return Err(Error::NoSeed);
    }
    let mut templates = Vec::with_capacity(3 * detections.len());
    let mut warnings = Vec::new();
    for (i, det) in detections.iter().enumerate() {
        det.validate()?;
        if det.w < MIN_TEMPLATE_PX || det.h < MIN_TEMPLATE_PX {
            warnings.push(format!(
                "detection {i} ({:.1}x{:.1} px) is too small to use as a template",
                det.w, det.h
            ));
            continue;
        }
        let patch = crop(image, det);
        for &deg in &ROTATIONS_DEG {
            let pixels = if deg == 0.0 {
                patch.clone()
            } else {
                rotate(&patch, deg.to_radians())
            };
            templates.push(Template {
                pixels,
                rotation_deg: deg,
                origin_box: *det,
            });
        }
    }
    Ok((templates, warnings))
}

/// Integer-grid patch at the rounded box position; pixels outside the image
/// replicate the nearest edge.
pub fn crop(image: &GrayImage, b: &PixelBox) -> GrayImage {
    let (x0, y0) = (b.x.round() as isize, b.y.round() as isize);
    let (w, h) = (b.w.round().max(1.0) as usize, b.h.round().max(1.0) as usize);
    let mut data = Vec::with_capacity(w * h);
    for v in 0..h as isize {
        for u in 0..w as isize {
            data.push(image.get_clamped(x0 + u, y0 + v));
        }
    }
    GrayImage::new(w, h, data).expect("sized buffer")
}

/// Rotates `patch` about its center by `angle` (counter-clockwise as
/// displayed) using bilinear sampling with edge replication. Output has the
/// input's dimensions.
pub fn rotate(patch: &GrayImage, angle: f64) -> GrayImage {
    let (w, h) = (patch.width(), patch.height());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (s, c) = angle.sin_cos();
    let mut out = GrayImage::filled(w, h, 0.0);
    for j in 0..h {
        for i in 0..w {
            let dx = i as f64 - cx;
            let dy = j as f64 - cy;
            // inverse mapping: rotate the output coordinate back by -angle
            let sx = cx + c * dx - s * dy;
            let sy = cy + s * dx + c * dy;
            out.set(i, j, bilinear(patch, sx, sy));
        }
    }
    out
}

fn bilinear(img: &GrayImage, x: f64, y: f64) -> f32 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as isize, y0 as isize);
    let p = |dx, dy| f64::from(img.get_clamped(x0 + dx, y0 + dy));
    let top = p(0, 0) * (1.0 - fx) + p(1, 0) * fx;
    let bot = p(0, 1) * (1.0 - fx) + p(1, 1) * fx;
    (top * (1.0 - fy) + bot * fy) as f32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::new(w, h, (0..w * h).map(|i| (i % 251) as f32).collect()).unwrap()
    }

    #[test]
    fn three_per_detection() {
        let img = ramp(40, 30);
        let d = PixelBox::new(5.0, 5.0, 10.0, 8.0, 0.9).unwrap();
        let (t, w) = extract_templates(&img, &[d]).unwrap();
        assert_eq!(t.len(), 3);
        assert!(w.is_empty());
        let rots: Vec<f64> = t.iter().map(|t| t.rotation_deg).collect();
        assert_eq!(rots, ROTATIONS_DEG);
        for t in &t {
            assert_eq!((t.pixels.width(), t.pixels.height()), (10, 8));
        }
        // zero rotation is the cropped patch itself
        let zero = &t[1].pixels;
        for v in 0..8 {
            for u in 0..10 {
                assert_eq!(zero.get(u, v), img.get(5 + u, 5 + v));
            }
        }

        let d2 = PixelBox::new(20.0, 5.0, 10.0, 8.0, 0.9).unwrap();
        assert_eq!(extract_templates(&img, &[d, d2]).unwrap().0.len(), 6);
    }

    #[test]
    fn degenerate_detection_warns() {
        let img = ramp(40, 30);
        let d = PixelBox::new(5.0, 5.0, 2.0, 2.0, 0.9).unwrap();
        let (t, w) = extract_templates(&img, &[d]).unwrap();
        assert!(t.is_empty());
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn no_seed() {
        let img = ramp(4, 4);
        assert!(matches!(extract_templates(&img, &[]), Err(Error::NoSeed)));
    }

    #[test]
    fn rotation_zero_is_identity_and_small_rotation_moves_corners() {
        let img = ramp(9, 7);
        assert_eq!(rotate(&img, 0.0), img);
        let r = rotate(&img, 2.5f64.to_radians());
        // center pixel is a fixed point
        assert_eq!(r.get(4, 3), img.get(4, 3));
        assert_ne!(r.get(0, 0), img.get(0, 0));
    }

    #[test]
    fn crop_replicates_edges() {
        let img = ramp(6, 6);
        let b = PixelBox::new(-1.0, 0.0, 3.0, 2.0, 1.0).unwrap();
        let p = crop(&img, &b);
        assert_eq!(p.get(0, 0), img.get(0, 0));
        assert_eq!(p.get(1, 0), img.get(0, 0));
        assert_eq!(p.get(2, 1), img.get(1, 1));
    }
}
