mod common;

use common::normal_chord;
use crackwidth::eval::{complex_specs, straight_strip_specs};
use crackwidth::synth::ShapeKind;
use crackwidth::{synth_crack, SyntheticSpec};

fn chord_at(crack: &crackwidth::SyntheticCrack, i: usize) -> f64 {
    let p = crack.points[i];
    let (s, c) = p.axis_angle.sin_cos();
    normal_chord(&crack.mask, p.check_point, (-s, c))
}

#[test]
fn tilted_strip_chords_match_width() {
    let crack = synth_crack(&SyntheticSpec::strip(7.0, 35.0)).unwrap();
    for i in 0..crack.points.len() {
        let chord = chord_at(&crack, i);
        assert!((chord - 7.0).abs() <= 1.0, "point {i}: {chord}");
    }
}

#[test]
fn jitter_free_corpus_is_self_consistent() {
    let specs = straight_strip_specs()
        .into_iter()
        .chain(complex_specs())
        .filter(|s| s.jitter_px == 0.0);
    let mut n = 0;
    for spec in specs {
        let crack = synth_crack(&spec).unwrap();
        for i in 0..crack.points.len() {
            let chord = chord_at(&crack, i);
            let gt = crack.points[i].gt_width_px;
            assert!(
                (chord - gt).abs() <= 1.0,
                "{:?} point {i}: chord {chord} vs {gt}",
                spec.kind
            );
            n += 1;
        }
    }
    assert!(n > 300);
}

#[test]
fn jittered_chords_stay_within_amplitude() {
    for spec in straight_strip_specs()
        .into_iter()
        .filter(|s| s.jitter_px > 0.0)
    {
        let crack = synth_crack(&spec).unwrap();
        for i in 0..crack.points.len() {
            let chord = chord_at(&crack, i);
            let p = crack.points[i];
            assert!((p.local_width_px - p.gt_width_px).abs() <= spec.jitter_px);
            // near a segment edge the chord crosses pixels of the neighbouring segment
            assert!(
                (chord - p.gt_width_px).abs() <= 1.0 + spec.jitter_px,
                "{spec:?} point {i}: {chord}"
            );
        }
    }
}

#[test]
fn cross_points_carry_their_arm_width() {
    let crack = synth_crack(&SyntheticSpec {
        kind: ShapeKind::Cross,
        width_px: 5.0,
        width2_px: Some(9.0),
        angle_deg: 20.0,
        canvas: (200, 200),
        ..SyntheticSpec::default()
    })
    .unwrap();
    let mut arms = [0, 0];
    for (i, p) in crack.points.iter().enumerate() {
        let want = if p.arm == 0 { 5.0 } else { 9.0 };
        assert_eq!(p.gt_width_px, want);
        let want_angle = if p.arm == 0 { 20.0 } else { 110.0 };
        assert!((p.axis_angle.to_degrees() - want_angle).abs() < 1e-9);
        assert!((chord_at(&crack, i) - want).abs() <= 1.0);
        assert!(crack
            .mask
            .get(p.check_point.x as i64, p.check_point.y as i64));
        arms[p.arm] += 1;
    }
    assert!(arms[0] > 0 && arms[1] > 0, "{arms:?}");
    assert!(
        crack
            .points
            .iter()
            .filter(|p| p.junction_distance.is_some_and(|d| d <= 24.0))
            .count()
            >= 6
    );
}

#[test]
fn every_kind_generates_valid_points() {
    for kind in [
        ShapeKind::Strip,
        ShapeKind::Zigzag,
        ShapeKind::Cross,
        ShapeKind::AlligatorMesh,
    ] {
        let spec = SyntheticSpec {
            kind,
            canvas: (240, 240),
            jitter_px: 1.0,
            seed: 9,
            ..SyntheticSpec::default()
        };
        let a = synth_crack(&spec).unwrap();
        let b = synth_crack(&spec).unwrap();
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.points, b.points);
        assert_eq!(a.points.len(), 13);
        for p in &a.points {
            assert!(
                a.mask.get(p.check_point.x as i64, p.check_point.y as i64),
                "{kind:?}"
            );
        }
    }
}
