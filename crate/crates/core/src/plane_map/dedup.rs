use crate::error::Result;
use crate::geometry::{nms_survivors, PlaneBox};

/// Collapses repeated sightings of the same window across frames with greedy
/// NMS. Each survivor's `source_frames` is the sorted union of its own frames
/// and those of every box it suppressed.
pub fn dedup_plane(boxes: &[PlaneBox], iou_threshold: f64) -> Result<Vec<PlaneBox>> {
    let survivors = nms_survivors(boxes, iou_threshold)?;
    Ok(survivors
        .into_iter()
        .map(|s| {
            let mut kept = boxes[s.kept].clone();
            for &j in &s.suppressed {
                kept.source_frames
                    .extend(boxes[j].source_frames.iter().cloned());
            }
            kept.source_frames.sort();
            kept.source_frames.dedup();
            kept
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pb(x: f64, y: f64, s: f64, frame: &str) -> PlaneBox {
        PlaneBox {
            x_m: x,
            y_m: y,
            w_m: 1.2,
            h_m: 1.5,
            score: s,
            source_frames: vec![frame.into()],
        }
    }

    #[test]
    fn four_sightings_one_window() {
        let boxes = vec![
            pb(0.0, 3.0, 0.8, "f2"),
            pb(0.01, 3.02, 0.9, "f0"),
            pb(-0.02, 2.99, 0.85, "f1"),
            pb(0.0, 3.01, 0.7, "f3"),
        ];
        let out = dedup_plane(&boxes, 0.3).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].score, 0.9);
        assert_eq!(out[0].source_frames, vec!["f0", "f1", "f2", "f3"]);
    }

    #[test]
    fn separate_windows_kept() {
        let boxes = vec![pb(0.0, 0.0, 0.9, "a"), pb(3.0, 0.0, 0.9, "a"), pb(0.0, 4.0, 0.9, "b")];
        assert_eq!(dedup_plane(&boxes, 0.3).unwrap().len(), 3);
    }

    #[test]
    fn empty() {
        assert!(dedup_plane(&[], 0.3).unwrap().is_empty());
    }
}
