use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::ingest::CameraModel;

/// Detector failure model: missed windows, corner noise, random confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionParams {
    pub dropout_p: f64,
    pub jitter_sigma_px: f64,
    pub seed: u64,
}

/// Minimum side of a corrupted box, pixels.
const MIN_SIDE_PX: f64 = 1.0;

/// See [`corrupt_detections_traced`]; this drops the provenance.
pub fn corrupt_detections(
    truth: &[Vec<PixelBox>],
    params: &CorruptionParams,
    camera: &CameraModel,
) -> Result<Vec<Vec<PixelBox>>> {
    Ok(corrupt_detections_traced(truth, params, camera)?
        .into_iter()
        .map(|f| f.into_iter().map(|(_, b)| b).collect())
        .collect())
}

/// Drops each box with probability `dropout_p` (re-drawing a frame until at
/// least one of its boxes survives), jitters the four edges of survivors
/// with N(0, sigma²), clamps them to the image and draws scores from
/// U(0.7, 1.0). Each output box is paired with the index of its truth box.
pub fn corrupt_detections_traced(
    truth: &[Vec<PixelBox>],
    params: &CorruptionParams,
    camera: &CameraModel,
) -> Result<Vec<Vec<(usize, PixelBox)>>> {
    if !(0.0..1.0).contains(&params.dropout_p) {
        return Err(Error::param("dropout_p", "must be in [0, 1)"));
    }
    if !(params.jitter_sigma_px >= 0.0 && params.jitter_sigma_px.is_finite()) {
        return Err(Error::param("jitter_sigma_px", "must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let jitter = Normal::new(0.0, params.jitter_sigma_px).map_err(|e| Error::param("jitter_sigma_px", e.to_string()))?;
    let (img_w, img_h) = (f64::from(camera.width_px), f64::from(camera.height_px));

    let mut out = Vec::with_capacity(truth.len());
    for frame in truth {
        let keep: Vec<bool> = loop {
            let k: Vec<bool> = frame
                .iter()
                .map(|_| !rng.gen_bool(params.dropout_p))
                .collect();
            if frame.is_empty() || k.iter().any(|&x| x) {
                break k;
            }
        };
        let mut boxes = Vec::new();
        for (i, (b, kept)) in frame.iter().zip(keep).enumerate() {
            if !kept {
                continue;
            }
            let mut l = b.x + jitter.sample(&mut rng);
            let mut t = b.y + jitter.sample(&mut rng);
            let mut r = b.right() + jitter.sample(&mut rng);
            let mut btm = b.bottom() + jitter.sample(&mut rng);
            l = l.clamp(0.0, img_w - MIN_SIDE_PX);
            t = t.clamp(0.0, img_h - MIN_SIDE_PX);
            r = r.clamp(l + MIN_SIDE_PX, img_w);
            btm = btm.clamp(t + MIN_SIDE_PX, img_h);
            let score = rng.gen_range(0.7..1.0);
            boxes.push((i, PixelBox::new(l, t, r - l, btm - t, score)?));
        }
        out.push(boxes);
    }
    Ok(out)
}
