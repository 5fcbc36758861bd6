//! Per-frame completion of detector output: every detected window (and its
//! ±2.5° rotations) is matched across its own storey strip, and the union of
//! originals and matches is reduced with NMS.

mod eval;
mod matching;
mod template;

use serde::{Deserialize, Serialize};

pub use self::eval::{
    eval_detections, match_predictions, metrics_from_flags, DetectionMetrics, MatchFlag,
};
pub use self::matching::{match_template, storey_strip, Band};
pub use self::template::{crop, extract_templates, rotate, Template, MIN_TEMPLATE_PX, ROTATIONS_DEG};
use self::matching::{check_fits, peaks_to_boxes, BandCorrelator};
use crate::error::{Error, Result};
use crate::geometry::{nms_ranked, PixelBox};
use crate::ingest::GrayImage;

/// Score multiplier for boxes found by template matching.
pub const CANDIDATE_SCORE_SCALE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    /// Minimum ZNCC for a correlation peak to become a candidate.
    pub ncc_threshold: f64,
    /// Strip padding above and below the seed, in seed heights.
    pub strip_margin: f64,
    pub nms_iou: f64,
    /// Minimum distance between accepted peaks in pixels; `None` means half
    /// the template width.
    pub peak_min_separation: Option<f64>,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            ncc_threshold: 0.80,
            strip_margin: 0.5,
            nms_iou: 0.3,
            peak_min_separation: None,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ncc_threshold > 0.0 && self.ncc_threshold <= 1.0) {
            return Err(Error::param("ncc_threshold", "must be in (0, 1]"));
        }
        if !(self.strip_margin >= 0.0 && self.strip_margin.is_finite()) {
            return Err(Error::param("strip_margin", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.nms_iou) {
            return Err(Error::param("nms_iou", "must be in [0, 1]"));
        }
        if let Some(s) = self.peak_min_separation {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::param("peak_min_separation", "must be >= 0"));
            }
        }
        Ok(())
    }

    pub(crate) fn min_separation(&self, template_w: usize) -> f64 {
        self.peak_min_separation
            .unwrap_or(0.5 * template_w as f64)
    }
}

/// Result of completing one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCompletion {
    /// Final boxes in descending score order.
    pub boxes: Vec<PixelBox>,
    pub originals: usize,
    pub candidates: usize,
    pub warnings: Vec<String>,
}

/// Per-frame diagnostics record as written next to the pipeline outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub frame: String,
    pub originals: usize,
    pub candidates: usize,
    pub kept: usize,
    pub warnings: Vec<String>,
}

impl FrameCompletion {
    pub fn diagnostics(&self, frame: &str) -> FrameDiagnostics {
        FrameDiagnostics {
            frame: frame.to_string(),
            originals: self.originals,
            candidates: self.candidates,
            kept: self.boxes.len(),
            warnings: self.warnings.clone(),
        }
    }
}

/// Completes the detections of one frame.
///
/// Originals are visited before any matched candidate during suppression,
/// so every box that survives `nms(detections)` also survives here;
/// candidates only fill places no original covers.
pub fn post_process_frame(
    image: &GrayImage,
    detections: &[PixelBox],
    params: &MatchParams,
) -> Result<FrameCompletion> {
    params.validate()?;
    let (templates, mut warnings) = extract_templates(image, detections)?;

    // (template index, own band rows)
    let mut jobs: Vec<(usize, (usize, usize))> = Vec::new();
    for (i, t) in templates.iter().enumerate() {
        let band = storey_strip(&t.origin_box, image.height(), params);
        let (lo, hi) = band.rows(image.height());
        match check_fits(t, lo, hi, image.width()) {
            Ok(()) => jobs.push((i, (lo, hi))),
            Err(e) => {
                if t.rotation_deg == 0.0 {
                    warnings.push(format!("seed at ({:.1}, {:.1}) skipped: {e}", t.origin_box.x, t.origin_box.y));
                }
            }
        }
    }

    let mut candidates = Vec::new();
    for group in group_bands(&jobs) {
        let lo = group.iter().map(|j| j.1 .0).min().expect("non-empty group");
        let hi = group.iter().map(|j| j.1 .1).max().expect("non-empty group");
        let corr = BandCorrelator::new(image, lo, hi);
        let pixels: Vec<&GrayImage> = group.iter().map(|j| &templates[j.0].pixels).collect();
        for (map, job) in corr.score_maps(&pixels).iter().zip(&group) {
            let t = &templates[job.0];
            candidates.extend(
                peaks_to_boxes(map, t, lo, job.1, params)
                    .into_iter()
                    .map(|b| b.with_score(b.score * CANDIDATE_SCORE_SCALE)),
            );
        }
    }

    let n_orig = detections.len();
    let n_cand = candidates.len();
    let mut all = detections.to_vec();
    all.extend(candidates);
    let survivors = nms_ranked(&all, params.nms_iou, |i| u8::from(i >= n_orig))?;
    let mut boxes: Vec<PixelBox> = survivors.into_iter().map(|s| all[s.kept]).collect();
    boxes.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });

    Ok(FrameCompletion {
        boxes,
        originals: n_orig,
        candidates: n_cand,
        warnings,
    })
}

/// Groups jobs whose bands overlap by at least half of the shorter band, so
/// templates of one storey share a single band transform. Scores do not
/// depend on the grouping.
fn group_bands(jobs: &[(usize, (usize, usize))]) -> Vec<Vec<(usize, (usize, usize))>> {
    let mut sorted = jobs.to_vec();
    sorted.sort_by_key(|j| (j.1 .0, j.1 .1, j.0));
    let mut groups: Vec<Vec<(usize, (usize, usize))>> = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for job in sorted {
        let (lo, hi) = job.1;
        match current {
            Some((glo, ghi)) => {
                let overlap = hi.min(ghi).saturating_sub(lo.max(glo));
                let shorter = (hi - lo).min(ghi - glo);
                if 2 * overlap >= shorter {
                    current = Some((glo.min(lo), ghi.max(hi)));
                    groups.last_mut().expect("open group").push(job);
                } else {
                    current = Some((lo, hi));
                    groups.push(vec![job]);
                }
            }
            None => {
                current = Some((lo, hi));
                groups.push(vec![job]);
            }
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{iou, nms};

    /// Wall at 60 with windows at 200 that carry a dark cross (frame detail).
    fn storey_image(xs: &[usize], y: usize) -> GrayImage {
        let mut img = GrayImage::filled(200, 80, 60.0);
        for &x in xs {
            for v in 0..20 {
                for u in 0..14 {
                    let val = if u == 7 || v == 10 || u == 0 || v == 0 { 120.0 } else { 200.0 };
                    img.set(x + u, y + v, val);
                }
            }
        }
        img
    }

    #[test]
    fn recovers_missing_windows_in_storey() {
        let xs = [10, 45, 80, 115, 150];
        let img = storey_image(&xs, 30);
        let seed = PixelBox::new(80.0, 30.0, 14.0, 20.0, 0.95).unwrap();
        let out = post_process_frame(&img, &[seed], &MatchParams::default()).unwrap();
        assert_eq!(out.boxes.len(), 5);
        let mut got: Vec<f64> = out.boxes.iter().map(|b| b.x).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![10.0, 45.0, 80.0, 115.0, 150.0]);
        assert!(out.boxes.iter().all(|b| b.y == 30.0));
        assert!(out.boxes.contains(&seed));
    }

    #[test]
    fn cross_matches_collapse() {
        let img = storey_image(&[20, 120], 30);
        let a = PixelBox::new(20.0, 30.0, 14.0, 20.0, 0.8).unwrap();
        let b = PixelBox::new(120.0, 30.0, 14.0, 20.0, 0.75).unwrap();
        let out = post_process_frame(&img, &[a, b], &MatchParams::default()).unwrap();
        assert_eq!(out.boxes, vec![a, b]);
        assert!(out.candidates >= 2);
    }

    #[test]
    fn nothing_to_add() {
        let img = storey_image(&[20], 30);
        let a = PixelBox::new(20.0, 30.0, 14.0, 20.0, 0.8).unwrap();
        let out = post_process_frame(&img, &[a], &MatchParams::default()).unwrap();
        assert_eq!(out.boxes, nms(&[a], 0.3).unwrap());
    }

    #[test]
    fn empty_detections_error() {
        let img = storey_image(&[20], 30);
        assert!(matches!(
            post_process_frame(&img, &[], &MatchParams::default()),
            Err(Error::NoSeed)
        ));
    }

    #[test]
    fn output_respects_nms_threshold() {
        let img = storey_image(&[10, 45, 80, 115, 150], 30);
        let seeds = [
            PixelBox::new(45.0, 30.0, 14.0, 20.0, 0.9).unwrap(),
            PixelBox::new(47.0, 31.0, 14.0, 20.0, 0.7).unwrap(),
        ];
        let p = MatchParams::default();
        let out = post_process_frame(&img, &seeds, &p).unwrap();
        for (i, a) in out.boxes.iter().enumerate() {
            for b in &out.boxes[i + 1..] {
                assert!(iou(a, b).unwrap() <= p.nms_iou);
            }
        }
    }

    #[test]
    fn band_grouping() {
        let jobs = vec![(0, (10, 50)), (1, (12, 52)), (2, (48, 90)), (3, (11, 51))];
        let g = group_bands(&jobs);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].len(), 3);
        assert_eq!(g[1], vec![(2, (48, 90))]);
    }

    #[test]
    fn params_validation() {
        let bad = MatchParams {
            ncc_threshold: 0.0,
            ..MatchParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = MatchParams {
            strip_margin: -1.0,
            ..MatchParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
