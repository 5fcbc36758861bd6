//! Write a corrupted synthetic dataset and read it back with the parsers.
//!
//! Usage: `cargo run --example synthetic_dataset [out_dir]`

use std::path::PathBuf;

use facade_survey::ingest::Sequence;
use facade_survey::synth::{
    corrupt_detections, covering_plan, gen_sequence, write_dataset, CorruptionParams,
    FacadeLayout, FlightPlan,
};

fn main() -> facade_survey::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("facade-synth"));
    let layout = FacadeLayout::default();
    let plan = FlightPlan {
        pitch_noise_sigma_rad: 0.02,
        seed: 3,
        ..covering_plan(&layout, &FlightPlan::default())
    };
    let seq = gen_sequence(&layout, &plan)?;
    let params = CorruptionParams { dropout_p: 0.15, jitter_sigma_px: 2.0, seed: 4 };
    let detections = corrupt_detections(&seq.truth(), &params, &plan.camera)?;
    let paths = write_dataset(&seq, &detections, &out)?;

    let loaded = Sequence::load(&paths.config)?;
    let truth: usize = seq.frames.iter().map(|f| f.truth.len()).sum();
    let kept: usize = loaded.detections.iter().map(Vec::len).sum();
    println!("wrote {}", out.display());
    println!("{} frames, {} truth boxes, {} detections after corruption", loaded.meta.frames.len(), truth, kept);
    println!("analytic window/facade ratio: {:.4}", layout.analytic_area_ratio());
    Ok(())
}
