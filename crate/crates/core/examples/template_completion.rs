//! Recover missed windows of a storey from a single detection.

use facade_survey::postprocess::{post_process_frame, MatchParams};
use facade_survey::synth::{gen_sequence, FacadeLayout, FlightPlan};

fn main() -> facade_survey::Result<()> {
    let layout = FacadeLayout { storeys: 1, windows_per_storey: 6, ..FacadeLayout::default() };
    let plan = FlightPlan {
        frame_count: 2,
        start_h_m: 1.75,
        end_h_m: 2.25,
        ..FlightPlan::default()
    };
    let seq = gen_sequence(&layout, &plan)?;
    let frame = &seq.frames[0];
    let seed = frame.truth[2];
    println!("{} windows in view, detector found one at x={:.1}", frame.truth.len(), seed.x);

    let done = post_process_frame(&frame.image, &[seed], &MatchParams::default())?;
    println!("{} candidates from {} originals, {} kept", done.candidates, done.originals, done.boxes.len());
    let mut boxes = done.boxes.clone();
    boxes.sort_by(|a, b| a.x.total_cmp(&b.x));
    for b in boxes {
        println!("  x={:>6.1} y={:>5.1} {:.1}x{:.1} score={:.3}", b.x, b.y, b.w, b.h, b.score);
    }
    Ok(())
}
