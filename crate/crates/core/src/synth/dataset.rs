use std::fs;
use std::path::{Path, PathBuf};

use super::SyntheticSequence;
use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::ingest::{encode_pgm, serialize_detections, serialize_telemetry, FrameDetections};

/// File names inside a generated dataset directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub config: PathBuf,
    pub telemetry: PathBuf,
    pub detections: PathBuf,
    pub truth: PathBuf,
    pub frames_dir: PathBuf,
}

impl DatasetPaths {
    pub const CONFIG: &'static str = "sequence.json";
    pub const TELEMETRY: &'static str = "telemetry.csv";
    pub const DETECTIONS: &'static str = "detections.json";
    pub const TRUTH: &'static str = "truth.json";
    pub const FRAMES: &'static str = "frames";

    pub fn in_dir(dir: &Path) -> Self {
        DatasetPaths {
            config: dir.join(Self::CONFIG),
            telemetry: dir.join(Self::TELEMETRY),
            detections: dir.join(Self::DETECTIONS),
            truth: dir.join(Self::TRUTH),
            frames_dir: dir.join(Self::FRAMES),
        }
    }
}

/// Writes the sequence in the on-disk input formats: sequence config,
/// telemetry CSV, `detections` as the detections file, the truth as an
/// annotations file, and one PGM per frame.
pub fn write_dataset(
    seq: &SyntheticSequence,
    detections: &[Vec<PixelBox>],
    dir: &Path,
) -> Result<DatasetPaths> {
    if detections.len() != seq.frames.len() {
        return Err(Error::Synth(format!(
            "{} detection lists for {} frames",
            detections.len(),
            seq.frames.len()
        )));
    }
    let paths = DatasetPaths::in_dir(dir);
    fs::create_dir_all(&paths.frames_dir).map_err(|e| Error::io(&paths.frames_dir, e))?;

    let write = |path: &Path, bytes: &[u8]| fs::write(path, bytes).map_err(|e| Error::io(path, e));

    write(&paths.config, seq.config().to_json().as_bytes())?;
    write(&paths.telemetry, serialize_telemetry(&seq.poses()).as_bytes())?;

    let image_rel = |id: &str| format!("{}/{id}.pgm", DatasetPaths::FRAMES);
    let to_doc = |lists: Vec<Vec<PixelBox>>| {
        let frames: Vec<FrameDetections> = seq
            .frames
            .iter()
            .zip(lists)
            .map(|(f, boxes)| FrameDetections {
                id: f.id.clone(),
                image: Some(image_rel(&f.id)),
                boxes,
            })
            .collect();
        serialize_detections(&frames)
    };
    write(&paths.detections, to_doc(detections.to_vec()).as_bytes())?;
    write(&paths.truth, to_doc(seq.truth()).as_bytes())?;

    for f in &seq.frames {
        write(&dir.join(image_rel(&f.id)), &encode_pgm(&f.image))?;
    }
    Ok(paths)
}
