//! Measures every generated check point on an alligator mesh and writes the
//! mask with the measured axes and chords drawn on top.
//!
//! ```text
//! cargo run --release --example overlay -- mesh_overlay.png
//! ```

use crackwidth::synth::ShapeKind;
use crackwidth::{measure_batch, render_overlay, synth_crack, CascadeConfig, SyntheticSpec};

fn main() -> crackwidth::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "mesh_overlay.png".into());
    let crack = synth_crack(&SyntheticSpec {
        kind: ShapeKind::AlligatorMesh,
        width_px: 5.0,
        width2_px: Some(4.0),
        angle_deg: 15.0,
        canvas: (240, 240),
        seed: 4,
        ..SyntheticSpec::default()
    })?;
    let results = measure_batch(
        &crack.mask,
        &crack.check_points(),
        &CascadeConfig::default(),
        4,
    );
    let measured: Vec<_> = results.into_iter().filter_map(|r| r.ok()).collect();
    render_overlay(&crack.mask, &measured, &out)?;
    println!(
        "{} of {} points drawn to {out}",
        measured.len(),
        crack.points.len()
    );
    Ok(())
}
