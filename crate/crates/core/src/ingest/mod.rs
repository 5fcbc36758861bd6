//! Reading survey inputs: telemetry, detections, frames and the sequence
//! config that ties them together.

mod detections;
mod image;
mod telemetry;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use self::detections::{
    load_detections, parse_detections, serialize_detections, within_bounds, DetectionsDocument,
    FrameDetections, EDGE_TOLERANCE,
};
pub use self::image::{
    decode_image, decode_pgm, decode_png, encode_pgm, encode_png, load_frame_image, load_image,
    luma, save_pgm, save_png, GrayImage,
};
pub use self::telemetry::{
    parse_telemetry, serialize_telemetry, sync_pose, Pose, SyncMode, SyncParams,
    TELEMETRY_HEADER,
};
use crate::error::{Error, Result};

/// Pinhole camera with the optical center at the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub focal_px: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_px.is_finite() && self.focal_px > 0.0) {
            return Err(Error::Config(format!(
                "focal_px must be positive, got {}",
                self.focal_px
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::Config("image dimensions must be at least 1 px".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTime {
    pub id: String,
    pub t_s: f64,
}

/// On-disk sequence config. Paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub depth_m: f64,
    pub focal_px: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub telemetry: String,
    pub detections: String,
    pub frame_times: Vec<FrameTime>,
}

impl SequenceConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn camera(&self) -> CameraModel {
        CameraModel {
            focal_px: self.focal_px,
            width_px: self.width_px,
            height_px: self.height_px,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMeta {
    pub id: String,
    pub t_s: f64,
    pub image: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMeta {
    /// Constant perpendicular distance from the UAV to the facade.
    pub depth_m: f64,
    pub camera: CameraModel,
    pub frames: Vec<FrameMeta>,
}

impl SequenceMeta {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth_m.is_finite() && self.depth_m > 0.0) {
            return Err(Error::Config(format!(
                "depth_m must be positive, got {}",
                self.depth_m
            )));
        }
        self.camera.validate()?;
        for pair in self.frames.windows(2) {
            if !(pair[1].t_s > pair[0].t_s) {
                return Err(Error::Config(format!(
                    "frame times must strictly increase (`{}` at {} s follows `{}` at {} s)",
                    pair[1].id, pair[1].t_s, pair[0].id, pair[0].t_s
                )));
            }
        }
        Ok(())
    }
}

/// Everything read from a sequence config, validated and cross-checked.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub meta: SequenceMeta,
    pub telemetry: Vec<Pose>,
    /// Detections in the order of `meta.frames`; frames absent from the
    /// detections file get an empty list.
    pub detections: Vec<Vec<crate::geometry::PixelBox>>,
    pub base_dir: PathBuf,
}

impl Sequence {
    pub fn load(config_path: &Path) -> Result<Self> {
        let text = read_text(config_path)?;
        let config = SequenceConfig::parse(&text)?;
        let base_dir = config_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Self::from_config(&config, &base_dir)
    }

    pub fn from_config(config: &SequenceConfig, base_dir: &Path) -> Result<Self> {
        let camera = config.camera();
        let mut meta = SequenceMeta {
            depth_m: config.depth_m,
            camera,
            frames: config
                .frame_times
                .iter()
                .map(|f| FrameMeta {
                    id: f.id.clone(),
                    t_s: f.t_s,
                    image: None,
                })
                .collect(),
        };
        meta.validate()?;

        let telemetry = parse_telemetry(&read_text(&base_dir.join(&config.telemetry))?)?;

        let ids: Vec<&str> = meta.frames.iter().map(|f| f.id.as_str()).collect();
        let det_frames = load_detections(
            &read_text(&base_dir.join(&config.detections))?,
            &camera,
            &ids,
        )?;
        let mut detections = vec![Vec::new(); meta.frames.len()];
        for f in det_frames {
            let idx = meta
                .frames
                .iter()
                .position(|m| m.id == f.id)
                .ok_or_else(|| Error::UnknownFrame(f.id.clone()))?;
            meta.frames[idx].image = f.image.map(|p| base_dir.join(p));
            detections[idx] = f.boxes;
        }

        Ok(Sequence {
            meta,
            telemetry,
            detections,
            base_dir: base_dir.to_path_buf(),
        })
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
