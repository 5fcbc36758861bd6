//! Detection quality against annotations: precision, recall, accuracy and
//! average precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou_unchecked, AxisBox, PixelBox};

/// Metrics of one frame or of a pooled set of frames. `None` marks a metric
/// that is undefined for the input (no predictions, or no truth boxes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub predicted: usize,
    pub truth: usize,
    pub matched: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// Recall as a percentage.
    pub accuracy: Option<f64>,
    /// Trapezoidal area under the precision/recall curve.
    pub ap: Option<f64>,
}

/// Outcome of matching one prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchFlag {
    pub score: f64,
    pub matched: bool,
}

/// Greedy one-to-one matching in descending prediction score: each
/// prediction takes the unmatched truth box with the highest IoU at or above
/// `match_iou`.
pub fn match_predictions(
    predicted: &[PixelBox],
    truth: &[PixelBox],
    match_iou: f64,
) -> Result<Vec<MatchFlag>> {
    if !(match_iou > 0.0 && match_iou <= 1.0) {
        return Err(Error::param(
            "match_iou",
            format!("{match_iou} outside (0, 1]"),
        ));
    }
    for b in predicted.iter().chain(truth) {
        b.check()?;
    }
    let mut order: Vec<usize> = (0..predicted.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&predicted[i], &predicted[j]);
        b.score
            .total_cmp(&a.score)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
            .then(i.cmp(&j))
    });

    let mut taken = vec![false; truth.len()];
    let mut flags = Vec::with_capacity(predicted.len());
    for i in order {
        let p = &predicted[i];
        let mut best: Option<(usize, f64)> = None;
        for (k, t) in truth.iter().enumerate() {
            if taken[k] {
                continue;
            }
            let v = iou_unchecked(p, t);
            if v >= match_iou && best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
        if let Some((k, _)) = best {
            taken[k] = true;
        }
        flags.push(MatchFlag {
            score: p.score,
            matched: best.is_some(),
        });
    }
    Ok(flags)
}

pub fn eval_detections(
    predicted: &[PixelBox],
    truth: &[PixelBox],
    match_iou: f64,
) -> Result<DetectionMetrics> {
    let flags = match_predictions(predicted, truth, match_iou)?;
    Ok(metrics_from_flags(&flags, truth.len()))
}

/// Metrics from match flags, possibly pooled over several frames.
pub fn metrics_from_flags(flags: &[MatchFlag], truth: usize) -> DetectionMetrics {
    let predicted = flags.len();
    let matched = flags.iter().filter(|f| f.matched).count();
    let precision = (predicted > 0).then(|| matched as f64 / predicted as f64);
    let recall = (truth > 0).then(|| matched as f64 / truth as f64);
    DetectionMetrics {
        predicted,
        truth,
        matched,
        precision,
        recall,
        accuracy: recall.map(|r| 100.0 * r),
        ap: (truth > 0).then(|| average_precision(flags, truth)),
    }
}

/// Area under the PR curve with one point per distinct score threshold,
/// integrated by trapezoids. The curve starts at recall 0 with the precision
/// of the first threshold.
fn average_precision(flags: &[MatchFlag], truth: usize) -> f64 {
    let mut sorted = flags.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut points: Vec<(f64, f64)> = Vec::new();
    let (mut tp, mut n) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].score;
        while i < sorted.len() && sorted[i].score == s {
            n += 1;
            tp += usize::from(sorted[i].matched);
            i += 1;
        }
        points.push((tp as f64 / truth as f64, tp as f64 / n as f64));
    }
    let Some(&(_, p0)) = points.first() else {
        return 0.0;
    };
    let mut area = 0.0;
    let (mut r_prev, mut p_prev) = (0.0, p0);
    for (r, p) in points {
        area += (r - r_prev) * (p + p_prev) / 2.0;
        r_prev = r;
        p_prev = p;
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, s: f64) -> PixelBox {
        PixelBox::new(x, y, 10.0, 10.0, s).unwrap()
    }

    #[test]
    fn perfect_detector() {
        let truth = [b(0.0, 0.0, 1.0), b(20.0, 0.0, 1.0), b(40.0, 0.0, 1.0)];
        let m = eval_detections(&truth, &truth, 0.5).unwrap();
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.recall, Some(1.0));
        assert_eq!(m.accuracy, Some(100.0));
        assert_eq!(m.ap, Some(1.0));
    }

    #[test]
    fn no_predictions() {
        let truth = [b(0.0, 0.0, 1.0); 4];
        let m = eval_detections(&[], &truth, 0.5).unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.ap, Some(0.0));
    }

    #[test]
    fn empty_truth_is_undefined() {
        let m = eval_detections(&[b(0.0, 0.0, 0.9)], &[], 0.5).unwrap();
        assert_eq!(m.recall, None);
        assert_eq!(m.accuracy, None);
        assert_eq!(m.ap, None);
        assert_eq!(m.precision, Some(0.0));
    }

    #[test]
    fn half_matched_with_spurious() {
        let truth = [b(0.0, 0.0, 1.0), b(50.0, 0.0, 1.0)];
        let pred = [b(1.0, 0.0, 0.9), b(200.0, 200.0, 0.8)];
        let m = eval_detections(&pred, &truth, 0.5).unwrap();
        assert_eq!(m.precision, Some(0.5));
        assert_eq!(m.recall, Some(0.5));
        // thresholds: 0.9 -> (r 0.5, p 1), 0.8 -> (r 0.5, p 0.5)
        assert!((m.ap.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_to_one_matching() {
        let truth = [b(0.0, 0.0, 1.0)];
        let pred = [b(0.0, 0.0, 0.9), b(0.5, 0.0, 0.95)];
        let flags = match_predictions(&pred, &truth, 0.5).unwrap();
        // the higher score is processed first and takes the only truth box
        assert_eq!(flags.iter().filter(|f| f.matched).count(), 1);
        assert!(flags[0].matched && flags[0].score == 0.95);
    }

    #[test]
    fn ap_ranks_matter() {
        let truth = [b(0.0, 0.0, 1.0), b(50.0, 0.0, 1.0)];
        // spurious prediction ranked first
        let pred = [b(300.0, 0.0, 0.99), b(0.0, 0.0, 0.9), b(50.0, 0.0, 0.8)];
        let m = eval_detections(&pred, &truth, 0.5).unwrap();
        // points (0, 0) (0.5, 0.5) (1, 2/3); start precision 0
        let want = 0.5 * (0.0 + 0.5) / 2.0 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((m.ap.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_threshold() {
        assert!(eval_detections(&[], &[], 0.0).is_err());
    }
}
