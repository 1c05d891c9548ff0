//! Width along a known axis, the line-fit cost around it, and the
//! skeleton-based baseline on a plain strip and at a crossing.
//!
//! ```text
//! cargo run --example width_baselines
//! ```

use crackwidth::synth::ShapeKind;
use crackwidth::{
    extract_patch, measure, measure_width_at, mpa_cost, sbm_width, synth_crack, CascadeConfig,
    CheckPoint, LineModel, SyntheticSpec,
};

fn main() -> crackwidth::Result<()> {
    let crack = synth_crack(&SyntheticSpec::strip(6.0, 0.0))?;
    let p = crack.points[0];
    let patch = extract_patch(&crack.mask, p.check_point, 64)?;
    let (cx, cy) = patch.center();
    let center = CheckPoint::new(cx, cy);

    println!("perpendicular runs on a horizontal 6 px strip:");
    for deg in [0.0, 10.0, 30.0] {
        let s = measure_width_at(&patch, center, f64::to_radians(deg))?;
        println!("  axis {deg:>4}°: {} px", s.width_px);
    }

    println!("summed chord lengths for lines through the center:");
    for deg in [-20.0, -10.0, 0.0, 10.0, 20.0] {
        let line = LineModel::through(
            (cx as f64, cy as f64),
            f64::to_radians(deg),
            (cx as f64, cy as f64),
        );
        let c = mpa_cost(&patch, &line, 9)?;
        println!("  line {deg:>5}°: {:.3} ({} chords)", c.cost, c.used);
    }

    println!(
        "skeleton baseline, strip: {:.2} px (truth {})",
        sbm_width(&patch)?,
        p.gt_width_px
    );

    let cross = synth_crack(&SyntheticSpec {
        kind: ShapeKind::Cross,
        width_px: 5.0,
        width2_px: Some(9.0),
        angle_deg: 20.0,
        canvas: (200, 200),
        ..SyntheticSpec::default()
    })?;
    let cfg = CascadeConfig::default();
    println!("near the crossing:");
    for q in cross
        .points
        .iter()
        .filter(|q| q.junction_distance.is_some_and(|d| d < 20.0))
        .take(5)
    {
        let patch = extract_patch(&cross.mask, q.check_point, 64)?;
        let m = measure(&cross.mask, q.check_point, &cfg)?;
        println!(
            "  ({},{}) truth {}  cascade {}  skeleton {:.2}",
            q.check_point.x,
            q.check_point.y,
            q.gt_width_px,
            m.width_px,
            sbm_width(&patch)?
        );
    }
    Ok(())
}
