//! Axis-aligned box algebra shared by the image-space and plane-space stages:
//! intersection over union and greedy non-maximum suppression.
//!
//! Both [`PixelBox`] (image rows grow downward) and [`PlaneBox`] (metric,
//! up-positive) store a box as a minimum corner plus extent, so the overlap
//! arithmetic is identical and lives behind the [`AxisBox`] trait.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window bounding box in image coordinates.
///
/// `x`/`y` are the left and top edges in pixels; `w`/`h` are real valued so
/// sub-pixel positions survive rotation and jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

impl PixelBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64, score: f64) -> Result<Self> {
        let b = PixelBox { x, y, w, h, score };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite position ({}, {})",
                self.x, self.y
            )));
        }
        check_extent(self.w, self.h)?;
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidBox(format!(
                "score {} outside [0, 1]",
                self.score
            )));
        }
        Ok(())
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn with_score(self, score: f64) -> Self {
        PixelBox { score, ..self }
    }
}

/// Window box on the global vertical facade plane.
///
/// `y_m` is the bottom edge measured upward from the facade/ground line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneBox {
    pub x_m: f64,
    pub y_m: f64,
    pub w_m: f64,
    pub h_m: f64,
    pub score: f64,
    pub source_frames: Vec<String>,
}

impl PlaneBox {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_m.is_finite() && self.y_m.is_finite() && self.score.is_finite()) {
            return Err(Error::InvalidBox("non-finite plane box".into()));
        }
        check_extent(self.w_m, self.h_m)
    }

    pub fn top_m(&self) -> f64 {
        self.y_m + self.h_m
    }

    pub fn area(&self) -> f64 {
        self.w_m * self.h_m
    }
}

fn check_extent(w: f64, h: f64) -> Result<()> {
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(Error::InvalidBox(format!(
            "non-positive or non-finite extent {w} x {h}"
        )));
    }
    Ok(())
}

/// Common view of an axis-aligned box: a minimum corner plus extent.
///
/// `min_y` is whatever the vertical origin edge is in the box's own frame
/// (top row for pixels, bottom edge for the plane).
pub trait AxisBox {
    fn min_x(&self) -> f64;
    fn min_y(&self) -> f64;
    fn width(&self) -> f64;
    fn height(&self) -> f64;
    fn score(&self) -> f64;

    fn check(&self) -> Result<()> {
        if !(self.min_x().is_finite() && self.min_y().is_finite()) {
            return Err(Error::InvalidBox("non-finite position".into()));
        }
        check_extent(self.width(), self.height())
    }
}

impl AxisBox for PixelBox {
    fn min_x(&self) -> f64 {
        self.x
    }
    fn min_y(&self) -> f64 {
        self.y
    }
    fn width(&self) -> f64 {
        self.w
    }
    fn height(&self) -> f64 {
        self.h
    }
    fn score(&self) -> f64 {
        self.score
    }
}

impl AxisBox for PlaneBox {
    fn min_x(&self) -> f64 {
        self.x_m
    }
    fn min_y(&self) -> f64 {
        self.y_m
    }
    fn width(&self) -> f64 {
        self.w_m
    }
    fn height(&self) -> f64 {
        self.h_m
    }
    fn score(&self) -> f64 {
        self.score
    }
}

/// Intersection over union of two boxes.
///
/// Areas are computed from the same edge coordinates as the intersection, so
/// `iou(a, a)` is exactly 1 and the result is exactly symmetric.
pub fn iou<A: AxisBox + ?Sized, B: AxisBox + ?Sized>(a: &A, b: &B) -> Result<f64> {
    a.check()?;
    b.check()?;
    Ok(iou_unchecked(a, b))
}

pub(crate) fn iou_unchecked<A: AxisBox + ?Sized, B: AxisBox + ?Sized>(a: &A, b: &B) -> f64 {
    let (ax0, ay0) = (a.min_x(), a.min_y());
    let (ax1, ay1) = (ax0 + a.width(), ay0 + a.height());
    let (bx0, by0) = (b.min_x(), b.min_y());
    let (bx1, by1) = (bx0 + b.width(), by0 + b.height());

    let iw = ax1.min(bx1) - ax0.max(bx0);
    let ih = ay1.min(by1) - ay0.max(by0);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let area_a = (ax1 - ax0) * (ay1 - ay0);
    let area_b = (bx1 - bx0) * (by1 - by0);
    let union = area_a + area_b - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// One surviving box of an NMS pass together with the inputs it suppressed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Survivor {
    pub kept: usize,
    pub suppressed: Vec<usize>,
}

/// Greedy score-ordered non-maximum suppression.
///
/// Returns the kept boxes in descending score order. Equal scores are ordered
/// by smaller `min_y`, then smaller `min_x`, which makes the result
/// independent of input order.
pub fn nms<B: AxisBox + Clone>(boxes: &[B], iou_threshold: f64) -> Result<Vec<B>> {
    Ok(nms_survivors(boxes, iou_threshold)?
        .into_iter()
        .map(|s| boxes[s.kept].clone())
        .collect())
}

/// Index form of [`nms`] that also reports which inputs each survivor
/// suppressed.
pub fn nms_survivors<B: AxisBox>(boxes: &[B], iou_threshold: f64) -> Result<Vec<Survivor>> {
    nms_ranked(boxes, iou_threshold, |_| 0)
}

/// NMS with a priority tier in front of the score: every box of a lower tier
/// value is visited before any box of a higher one.
pub(crate) fn nms_ranked<B: AxisBox>(
    boxes: &[B],
    iou_threshold: f64,
    tier: impl Fn(usize) -> u8,
) -> Result<Vec<Survivor>> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(Error::param(
            "iou_threshold",
            format!("{iou_threshold} outside [0, 1]"),
        ));
    }
    for b in boxes {
        b.check()?;
    }

    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&i, &j| {
        tier(i)
            .cmp(&tier(j))
            .then_with(|| rank_order(&boxes[i], &boxes[j]))
            .then(i.cmp(&j))
    });

    let mut alive = vec![true; boxes.len()];
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if !alive[i] {
            continue;
        }
        let mut suppressed = Vec::new();
        for &j in &order[pos + 1..] {
            if alive[j] && iou_unchecked(&boxes[i], &boxes[j]) > iou_threshold {
                alive[j] = false;
                suppressed.push(j);
            }
        }
        out.push(Survivor { kept: i, suppressed });
    }
    Ok(out)
}

/// Descending score, then ascending position and size.
fn rank_order<B: AxisBox>(a: &B, b: &B) -> Ordering {
    b.score()
        .total_cmp(&a.score())
        .then(a.min_y().total_cmp(&b.min_y()))
        .then(a.min_x().total_cmp(&b.min_x()))
        .then(a.width().total_cmp(&b.width()))
        .then(a.height().total_cmp(&b.height()))
}
