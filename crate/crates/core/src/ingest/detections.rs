use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::CameraModel;
use crate::error::{Error, Result};
use crate::geometry::PixelBox;

/// Fraction of a box's own size it may stick out of the image.
pub const EDGE_TOLERANCE: f64 = 0.1;

/// Detections (or annotations) for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub boxes: Vec<PixelBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsDocument {
    pub frames: Vec<FrameDetections>,
}

#[derive(Deserialize)]
struct RawBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    #[serde(default = "one")]
    score: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct RawFrame {
    id: String,
    #[serde(default)]
    image: Option<String>,
    #[serde(default)]
    boxes: Vec<RawBox>,
}

#[derive(Deserialize)]
struct RawDocument {
    frames: Vec<RawFrame>,
}

/// Parses a detections/annotations document and validates every box on its
/// own. A missing `score` reads as 1.0 (annotation files).
pub fn parse_detections(text: &str) -> Result<Vec<FrameDetections>> {
    let raw: RawDocument =
        serde_json::from_str(text).map_err(|e| Error::Detections(e.to_string()))?;
    let mut seen = HashSet::new();
    let mut frames = Vec::with_capacity(raw.frames.len());
    for f in raw.frames {
        if !seen.insert(f.id.clone()) {
            return Err(Error::Detections(format!("duplicate frame id `{}`", f.id)));
        }
        let boxes = f
            .boxes
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                PixelBox::new(b.x, b.y, b.w, b.h, b.score).map_err(|e| {
                    Error::Detections(format!("frame `{}` box {i}: {e}", f.id))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        frames.push(FrameDetections {
            id: f.id,
            image: f.image,
            boxes,
        });
    }
    Ok(frames)
}

/// Parses detections and checks them against the sequence: every frame id
/// must be declared and every box must lie inside the image up to
/// [`EDGE_TOLERANCE`] of its own size.
pub fn load_detections(
    text: &str,
    camera: &CameraModel,
    known_ids: &[&str],
) -> Result<Vec<FrameDetections>> {
    let frames = parse_detections(text)?;
    let known: HashSet<&str> = known_ids.iter().copied().collect();
    for f in &frames {
        if !known.contains(f.id.as_str()) {
            return Err(Error::UnknownFrame(f.id.clone()));
        }
        for (i, b) in f.boxes.iter().enumerate() {
            if !within_bounds(b, camera) {
                return Err(Error::Detections(format!(
                    "frame `{}` box {i} lies outside the {}x{} image beyond the edge tolerance",
                    f.id, camera.width_px, camera.height_px
                )));
            }
        }
    }
    Ok(frames)
}

pub fn within_bounds(b: &PixelBox, camera: &CameraModel) -> bool {
    let (tw, th) = (EDGE_TOLERANCE * b.w, EDGE_TOLERANCE * b.h);
    b.x >= -tw
        && b.y >= -th
        && b.right() <= f64::from(camera.width_px) + tw
        && b.bottom() <= f64::from(camera.height_px) + th
}

pub fn serialize_detections(frames: &[FrameDetections]) -> String {
    let doc = DetectionsDocument {
        frames: frames.to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("detections serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel {
        CameraModel {
            focal_px: 920.0,
            width_px: 1280,
            height_px: 720,
        }
    }

    #[test]
    fn one_frame_one_box() {
        let text = r#"{"frames":[{"id":"f0","image":"f0.pgm","boxes":[{"x":10,"y":20,"w":50,"h":80,"score":0.97}]}]}"#;
        let frames = load_detections(text, &cam(), &["f0"]).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].id, "f0");
        assert_eq!(
            frames[0].boxes,
            vec![PixelBox::new(10.0, 20.0, 50.0, 80.0, 0.97).unwrap()]
        );
    }

    #[test]
    fn negative_width_rejected() {
        let text = r#"{"frames":[{"id":"f0","boxes":[{"x":10,"y":20,"w":-5,"h":80,"score":0.9}]}]}"#;
        assert!(matches!(
            load_detections(text, &cam(), &["f0"]),
            Err(Error::Detections(_))
        ));
    }

    #[test]
    fn empty_frames_ok() {
        assert!(load_detections(r#"{"frames":[]}"#, &cam(), &[])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_frame_rejected() {
        let text = r#"{"frames":[{"id":"zz","boxes":[]}]}"#;
        assert!(matches!(
            load_detections(text, &cam(), &["f0"]),
            Err(Error::UnknownFrame(id)) if id == "zz"
        ));
    }

    #[test]
    fn malformed_document() {
        assert!(matches!(
            parse_detections(r#"{"frames": [ {"id": 3} ]"#),
            Err(Error::Detections(_))
        ));
    }

    #[test]
    fn annotation_score_defaults_to_one() {
        let text = r#"{"frames":[{"id":"a","boxes":[{"x":0,"y":0,"w":5,"h":5}]}]}"#;
        assert_eq!(parse_detections(text).unwrap()[0].boxes[0].score, 1.0);
    }

    #[test]
    fn edge_tolerance() {
        let c = cam();
        // 5 px past the left edge of a 50 px box is within 10%
        assert!(within_bounds(
            &PixelBox::new(-5.0, 0.0, 50.0, 50.0, 1.0).unwrap(),
            &c
        ));
        assert!(!within_bounds(
            &PixelBox::new(-6.0, 0.0, 50.0, 50.0, 1.0).unwrap(),
            &c
        ));
        assert!(!within_bounds(
            &PixelBox::new(0.0, 700.0, 50.0, 50.0, 1.0).unwrap(),
            &c
        ));
    }
}
