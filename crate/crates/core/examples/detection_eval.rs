//! Precision, recall and AP of a detector before and after completion.

use facade_survey::postprocess::{eval_detections, post_process_frame, MatchParams};
use facade_survey::synth::{
    corrupt_detections, covering_plan, gen_sequence, CorruptionParams, FacadeLayout, FlightPlan,
};

fn main() -> facade_survey::Result<()> {
    let layout = FacadeLayout::default();
    let plan = FlightPlan { seed: 5, ..covering_plan(&layout, &FlightPlan::default()) };
    let seq = gen_sequence(&layout, &plan)?;
    let params = CorruptionParams { dropout_p: 0.3, jitter_sigma_px: 1.5, seed: 6 };
    let detections = corrupt_detections(&seq.truth(), &params, &plan.camera)?;

    println!("{:<10} {:>14} {:>14}", "frame", "recall before", "recall after");
    for (f, det) in seq.frames.iter().zip(&detections) {
        let before = eval_detections(det, &f.truth, 0.5)?;
        let done = post_process_frame(&f.image, det, &MatchParams::default())?;
        let after = eval_detections(&done.boxes, &f.truth, 0.5)?;
        let fmt = |r: Option<f64>| r.map_or("n/a".into(), |v| format!("{v:.3}"));
        println!("{:<10} {:>14} {:>14}", f.id, fmt(before.recall), fmt(after.recall));
    }
    Ok(())
}
