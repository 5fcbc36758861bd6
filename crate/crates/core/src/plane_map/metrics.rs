use serde::{Deserialize, Serialize};

use super::storeys::StoreyCount;
use crate::error::{Error, Result};
use crate::geometry::PlaneBox;

/// Rectangle on the facade plane; `y_m` is its bottom edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacadeExtent {
    pub x_m: f64,
    pub y_m: f64,
    pub w_m: f64,
    pub h_m: f64,
}

impl FacadeExtent {
    pub fn area(&self) -> f64 {
        self.w_m * self.h_m
    }

    fn overlap_area(&self, b: &PlaneBox) -> f64 {
        let w = (self.x_m + self.w_m).min(b.x_m + b.w_m) - self.x_m.max(b.x_m);
        let h = (self.y_m + self.h_m).min(b.top_m()) - self.y_m.max(b.y_m);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

/// Bounding rectangle of all boxes grown by `margin_m` on every side.
pub fn auto_extent(boxes: &[PlaneBox], margin_m: f64) -> Option<FacadeExtent> {
    let first = boxes.first()?;
    let (mut x0, mut y0) = (first.x_m, first.y_m);
    let (mut x1, mut y1) = (first.x_m + first.w_m, first.top_m());
    for b in &boxes[1..] {
        x0 = x0.min(b.x_m);
        y0 = y0.min(b.y_m);
        x1 = x1.max(b.x_m + b.w_m);
        y1 = y1.max(b.top_m());
    }
    Some(FacadeExtent {
        x_m: x0 - margin_m,
        y_m: y0 - margin_m,
        w_m: x1 - x0 + 2.0 * margin_m,
        h_m: y1 - y0 + 2.0 * margin_m,
    })
}

/// Window area over facade area. Only the part of each box inside `extent`
/// counts, and the ratio is capped at 1.
pub fn area_ratio(unique: &[PlaneBox], extent: &FacadeExtent) -> Result<f64> {
    let area = extent.area();
    if !(area.is_finite() && area > 0.0 && extent.w_m > 0.0) {
        return Err(Error::ZeroExtent);
    }
    let windows: f64 = unique.iter().map(|b| extent.overlap_area(b)).sum();
    Ok((windows / area).min(1.0))
}

/// Facade-level results of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FacadeMetrics {
    pub window_count: usize,
    pub storey_count: usize,
    pub windows_per_storey: Vec<usize>,
    pub area_ratio: f64,
    pub facade_extent: Option<FacadeExtent>,
    pub unique_windows: Vec<PlaneBox>,
    pub storeys: StoreyCount,
}

impl FacadeMetrics {
    pub fn to_document(&self) -> MetricsDocument {
        MetricsDocument {
            window_count: self.window_count,
            storey_count: self.storey_count,
            windows_per_storey: self.windows_per_storey.clone(),
            area_ratio: self.area_ratio,
            facade_extent: ExtentSize {
                w_m: self.facade_extent.map_or(0.0, |e| e.w_m),
                h_m: self.facade_extent.map_or(0.0, |e| e.h_m),
            },
            unique_windows: self
                .unique_windows
                .iter()
                .map(|b| UniqueWindow {
                    x_m: b.x_m,
                    y_m: b.y_m,
                    w_m: b.w_m,
                    h_m: b.h_m,
                    source_frames: b.source_frames.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtentSize {
    pub w_m: f64,
    pub h_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniqueWindow {
    pub x_m: f64,
    pub y_m: f64,
    pub w_m: f64,
    pub h_m: f64,
    pub source_frames: Vec<String>,
}

impl UniqueWindow {
    pub fn to_plane_box(&self) -> PlaneBox {
        PlaneBox {
            x_m: self.x_m,
            y_m: self.y_m,
            w_m: self.w_m,
            h_m: self.h_m,
            score: 1.0,
            source_frames: self.source_frames.clone(),
        }
    }
}

/// The metrics JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub window_count: usize,
    pub storey_count: usize,
    pub windows_per_storey: Vec<usize>,
    pub area_ratio: f64,
    pub facade_extent: ExtentSize,
    pub unique_windows: Vec<UniqueWindow>,
}

impl MetricsDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: MetricsDocument =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("metrics: {e}")))?;
        if doc.windows_per_storey.iter().sum::<usize>() != doc.window_count {
            return Err(Error::Config(
                "metrics: windows_per_storey does not sum to window_count".into(),
            ));
        }
        if !(0.0..=1.0).contains(&doc.area_ratio) {
            return Err(Error::Config("metrics: area_ratio outside [0, 1]".into()));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pb(x: f64, y: f64, w: f64, h: f64) -> PlaneBox {
        PlaneBox {
            x_m: x,
            y_m: y,
            w_m: w,
            h_m: h,
            score: 1.0,
            source_frames: vec![],
        }
    }

    #[test]
    fn twenty_windows_ratio() {
        let mut boxes = Vec::new();
        for s in 0..4 {
            for k in 0..5 {
                boxes.push(pb(1.0 + 3.5 * k as f64, 1.0 + 2.2 * s as f64, 1.5, 1.2));
            }
        }
        let extent = FacadeExtent {
            x_m: 0.0,
            y_m: 0.0,
            w_m: 20.0,
            h_m: 10.0,
        };
        assert!((area_ratio(&boxes, &extent).unwrap() - 0.18).abs() < 1e-12);
    }

    #[test]
    fn no_windows_and_zero_extent() {
        let e = FacadeExtent {
            x_m: 0.0,
            y_m: 0.0,
            w_m: 2.0,
            h_m: 2.0,
        };
        assert_eq!(area_ratio(&[], &e).unwrap(), 0.0);
        let z = FacadeExtent { w_m: 0.0, ..e };
        assert!(matches!(area_ratio(&[], &z), Err(Error::ZeroExtent)));
    }

    #[test]
    fn auto_extent_pads() {
        let e = auto_extent(&[pb(0.0, 1.0, 1.0, 1.0), pb(3.0, 4.0, 1.0, 1.0)], 0.5).unwrap();
        assert_eq!(
            e,
            FacadeExtent {
                x_m: -0.5,
                y_m: 0.5,
                w_m: 5.0,
                h_m: 5.0
            }
        );
        assert!(auto_extent(&[], 1.0).is_none());
    }

    #[test]
    fn ratio_capped() {
        let e = FacadeExtent {
            x_m: 0.0,
            y_m: 0.0,
            w_m: 1.0,
            h_m: 1.0,
        };
        let boxes = [pb(0.0, 0.0, 1.0, 1.0), pb(0.0, 0.0, 1.0, 1.0)];
        assert_eq!(area_ratio(&boxes, &e).unwrap(), 1.0);
    }
}
