use facade_survey::geometry::{iou, nms, PixelBox, PlaneBox};
use facade_survey::ingest::{
    parse_telemetry, serialize_telemetry, sync_pose, CameraModel, GrayImage, Pose, SyncParams,
};
use facade_survey::pipeline::{run_frames, FrameInput, PipelineParams};
use facade_survey::plane_map::{count_storeys, dedup_plane, MappingContext};
use facade_survey::postprocess::{
    extract_templates, match_template, post_process_frame, storey_strip, MatchParams,
};
use facade_survey::synth::{covering_plan, gen_sequence, FacadeLayout, FlightPlan};
use proptest::prelude::*;

fn pixel_box() -> impl Strategy<Value = PixelBox> {
    (0.0..200.0, 0.0..200.0, 0.5..80.0, 0.5..80.0, 0.0..=1.0)
        .prop_map(|(x, y, w, h, s)| PixelBox::new(x, y, w, h, s).unwrap())
}

/// Boxes on a coarse grid with few distinct scores, so overlaps and ties
/// are common.
fn grid_box() -> impl Strategy<Value = PixelBox> {
    (0..20u8, 0..20u8, 1..12u8, 1..12u8, 0..4u8).prop_map(|(x, y, w, h, s)| {
        PixelBox::new(
            f64::from(x),
            f64::from(y),
            f64::from(w),
            f64::from(h),
            f64::from(s) / 3.0,
        )
        .unwrap()
    })
}

fn plane_box() -> impl Strategy<Value = PlaneBox> {
    (0..64i32, 0..96i32, 4..16i32, 4..16i32, 0..4u8).prop_map(|(x, y, w, h, s)| PlaneBox {
        x_m: f64::from(x) / 8.0,
        y_m: f64::from(y) / 8.0,
        w_m: f64::from(w) / 8.0,
        h_m: f64::from(h) / 8.0,
        score: f64::from(s) / 3.0,
        source_frames: vec![format!("f{x}")],
    })
}

proptest! {
    #[test]
    fn iou_symmetric_and_bounded(a in pixel_box(), b in pixel_box()) {
        let ab = iou(&a, &b).unwrap();
        prop_assert_eq!(ab, iou(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn iou_disjoint_is_zero(a in pixel_box(), gap in 0.0..50.0) {
        let b = PixelBox::new(a.right() + gap, a.y, a.w, a.h, 1.0).unwrap();
        prop_assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn nms_properties(boxes in prop::collection::vec(grid_box(), 0..25), thr in 0.0..=1.0f64) {
        let kept = nms(&boxes, thr).unwrap();
        for k in &kept {
            prop_assert!(boxes.contains(k));
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(iou(a, b).unwrap() <= thr);
            }
        }
        prop_assert!(kept.windows(2).all(|p| p[0].score >= p[1].score));
        prop_assert_eq!(nms(&kept, thr).unwrap(), kept.clone());
        let mut reversed = boxes.clone();
        reversed.reverse();
        prop_assert_eq!(nms(&reversed, thr).unwrap(), kept);
    }

    #[test]
    fn nms_at_one_keeps_distinct_boxes(boxes in prop::collection::vec(grid_box(), 0..25)) {
        let kept = nms(&boxes, 1.0).unwrap();
        let mut distinct: Vec<(u64, u64, u64, u64)> = boxes
            .iter()
            .map(|b| (b.x.to_bits(), b.y.to_bits(), b.w.to_bits(), b.h.to_bits()))
            .collect();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(kept.len(), distinct.len());
    }

    #[test]
    fn dedup_survivors_separated(boxes in prop::collection::vec(plane_box(), 0..30), thr in 0.0..=1.0f64) {
        let unique = dedup_plane(&boxes, thr).unwrap();
        for (i, a) in unique.iter().enumerate() {
            for b in &unique[i + 1..] {
                prop_assert!(iou(a, b).unwrap() <= thr);
            }
        }
        let mut reversed = boxes.clone();
        reversed.reverse();
        prop_assert_eq!(dedup_plane(&reversed, thr).unwrap().len(), unique.len());
    }

    #[test]
    fn storeys_permutation_and_translation(
        boxes in prop::collection::vec(plane_box(), 0..30),
        shift in -16i32..16,
        rot in 0usize..30,
    ) {
        let unique = dedup_plane(&boxes, 0.3).unwrap();
        let base = count_storeys(&unique, 0.5).unwrap();
        let mut permuted = unique.clone();
        if !permuted.is_empty() {
            let k = rot % permuted.len();
            permuted.rotate_left(k);
        }
        permuted.reverse();
        let p = count_storeys(&permuted, 0.5).unwrap();
        prop_assert_eq!(&p.windows_per_storey, &base.windows_per_storey);
        let dy = f64::from(shift) / 4.0;
        let moved: Vec<PlaneBox> = unique
            .iter()
            .map(|b| PlaneBox { y_m: b.y_m + dy, ..b.clone() })
            .collect();
        let m = count_storeys(&moved, 0.5).unwrap();
        prop_assert_eq!(m.storey_count, base.storey_count);
        prop_assert_eq!(&m.windows_per_storey, &base.windows_per_storey);
        prop_assert_eq!(base.windows_per_storey.iter().sum::<usize>(), unique.len());
    }

    #[test]
    fn telemetry_round_trip(
        steps in prop::collection::vec((1e-3..10.0f64, -50.0..200.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..40),
        t0 in -100.0..100.0f64,
    ) {
        let mut t = t0;
        let poses: Vec<Pose> = steps
            .iter()
            .map(|&(dt, h, r, p, y)| {
                t += dt;
                Pose { t, altitude_m: h, roll_rad: r, pitch_rad: p, yaw_rad: y }
            })
            .collect();
        prop_assert_eq!(parse_telemetry(&serialize_telemetry(&poses)).unwrap(), poses);
    }

    #[test]
    fn sync_midpoint_is_mean(h0 in 0.0..50.0f64, h1 in 0.0..50.0f64, p0 in -0.3..0.3f64, p1 in -0.3..0.3f64, dt in 0.01..5.0f64) {
        let a = Pose { t: 1.0, altitude_m: h0, roll_rad: 0.0, pitch_rad: p0, yaw_rad: 0.0 };
        let b = Pose { t: 1.0 + dt, altitude_m: h1, roll_rad: 0.0, pitch_rad: p1, yaw_rad: 0.0 };
        let log = [a, b];
        let params = SyncParams::default();
        let mid = sync_pose("m", 1.0 + dt / 2.0, &log, &params).unwrap();
        prop_assert!((mid.altitude_m - (h0 + h1) / 2.0).abs() < 1e-12);
        prop_assert!((mid.pitch_rad - (p0 + p1) / 2.0).abs() < 1e-12);
        prop_assert_eq!(sync_pose("a", a.t, &log, &params).unwrap(), a);
        prop_assert_eq!(sync_pose("b", b.t, &log, &params).unwrap(), b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zncc_affine_invariant(
        pixels in prop::collection::vec(0u8..=255, 48 * 32),
        bx in 0usize..36, by in 0usize..22,
        a in 0.1f32..4.0, b in -200.0f32..200.0,
    ) {
        let image = GrayImage::from_u8(48, 32, &pixels).unwrap();
        let seed = PixelBox::new(bx as f64, by as f64, 10.0, 9.0, 1.0).unwrap();
        let (templates, _) = extract_templates(&image, &[seed]).unwrap();
        let params = MatchParams { ncc_threshold: 0.2, ..MatchParams::default() };
        let band = storey_strip(&seed, 32, &params);
        for t in &templates {
            let p = match_template(&image, t, band, &params).unwrap();
            let q = match_template(&image.map_affine(a, b), t, band, &params).unwrap();
            prop_assert_eq!(p.len(), q.len());
            for (u, v) in p.iter().zip(&q) {
                prop_assert_eq!((u.x, u.y), (v.x, v.y));
                prop_assert!((u.score - v.score).abs() <= 1e-6);
            }
        }
    }
}

fn synthetic_frames(seed: u64) -> (Vec<FrameInput>, MappingContext, Vec<Vec<PixelBox>>) {
    let layout = FacadeLayout::default();
    let plan = FlightPlan {
        seed,
        pitch_noise_sigma_rad: 0.02,
        ..covering_plan(&layout, &FlightPlan::default())
    };
    let seq = gen_sequence(&layout, &plan).unwrap();
    let frames = seq
        .frames
        .iter()
        .map(|f| FrameInput {
            id: f.id.clone(),
            pose: f.pose,
            image: Some(f.image.clone()),
            detections: f.truth.clone(),
        })
        .collect();
    (frames, seq.mapping_context(), seq.truth())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn completion_is_monotone(seed in 0u64..1000, mask in prop::collection::vec(any::<bool>(), 20), scores in prop::collection::vec(0.5..1.0f64, 20)) {
        let (frames, _, _) = synthetic_frames(seed);
        let f = &frames[seed as usize % frames.len()];
        let mut det: Vec<PixelBox> = f
            .detections
            .iter()
            .zip(&mask)
            .zip(&scores)
            .filter(|((_, keep), _)| **keep)
            .map(|((b, _), s)| b.with_score(*s))
            .collect();
        if det.is_empty() {
            det.push(f.detections[0]);
        }
        let params = MatchParams::default();
        let out = post_process_frame(f.image.as_ref().unwrap(), &det, &params).unwrap();
        for b in nms(&det, params.nms_iou).unwrap() {
            prop_assert!(out.boxes.contains(&b));
        }
        for (i, a) in out.boxes.iter().enumerate() {
            for b in &out.boxes[i + 1..] {
                prop_assert!(iou(a, b).unwrap() <= params.nms_iou);
            }
        }
    }

    #[test]
    fn altitude_shift_is_equivariant(seed in 0u64..1000, dh in -30.0..30.0f64) {
        let (frames, ctx, _) = synthetic_frames(seed);
        let params = PipelineParams { skip_postprocess: true, ..PipelineParams::default() };
        let base = run_frames(&frames, &ctx, &params).unwrap();
        let shifted: Vec<FrameInput> = frames
            .iter()
            .map(|f| FrameInput { pose: Pose { altitude_m: f.pose.altitude_m + dh, ..f.pose }, ..f.clone() })
            .collect();
        let moved = run_frames(&shifted, &ctx, &params).unwrap();
        prop_assert_eq!(moved.metrics.window_count, base.metrics.window_count);
        prop_assert_eq!(moved.metrics.storey_count, base.metrics.storey_count);
        prop_assert!((moved.metrics.area_ratio - base.metrics.area_ratio).abs() < 1e-9);
        for (a, b) in base.metrics.unique_windows.iter().zip(&moved.metrics.unique_windows) {
            prop_assert!((b.y_m - a.y_m - dh).abs() < 1e-9);
        }
    }
}

#[test]
fn camera_for_mapping_is_validated() {
    let bad = CameraModel { focal_px: 0.0, width_px: 10, height_px: 10 };
    assert!(MappingContext::new(5.0, bad, 0.0).is_err());
}
