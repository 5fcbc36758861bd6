//! Overlap and greedy suppression of scored boxes.

use facade_survey::geometry::{iou, nms, PixelBox};

fn main() -> facade_survey::Result<()> {
    let a = PixelBox::new(0.0, 0.0, 10.0, 10.0, 0.9)?;
    let b = PixelBox::new(5.0, 0.0, 10.0, 10.0, 0.8)?;
    let c = PixelBox::new(40.0, 0.0, 10.0, 10.0, 0.7)?;
    println!("iou(a, b) = {:.4}", iou(&a, &b)?);
    println!("iou(a, c) = {:.4}", iou(&a, &c)?);

    for thr in [0.2, 0.5] {
        let kept = nms(&[a, b, c], thr)?;
        println!("nms at {thr}: {} boxes kept", kept.len());
        for k in kept {
            println!("  x={:>4} score={}", k.x, k.score);
        }
    }
    Ok(())
}
