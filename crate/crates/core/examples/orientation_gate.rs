//! The fast-path estimates on two patches: a plain strip, where the PCA axis
//! and the RANSAC edge agree, and a crossing, where they do not.
//!
//! ```text
//! cargo run --example orientation_gate
//! ```

use crackwidth::cascade::is_low_complexity;
use crackwidth::synth::ShapeKind;
use crackwidth::{
    center_points, extract_boundary, extract_patch, pca_slope, ransac_fit, synth_crack,
    RansacParams, SyntheticSpec,
};

fn main() -> crackwidth::Result<()> {
    let gamma = 10f64.to_radians();
    let cases = [
        ("strip", SyntheticSpec::strip(5.0, 30.0)),
        (
            "cross",
            SyntheticSpec {
                kind: ShapeKind::Cross,
                width_px: 5.0,
                width2_px: Some(9.0),
                angle_deg: 20.0,
                canvas: (200, 200),
                ..SyntheticSpec::default()
            },
        ),
    ];
    for (name, spec) in cases {
        let crack = synth_crack(&spec)?;
        // the point nearest a junction, if there is one
        let p = crack
            .points
            .iter()
            .min_by(|a, b| {
                let d =
                    |p: &crackwidth::synth::SyntheticPoint| p.junction_distance.unwrap_or(f64::MAX);
                d(a).total_cmp(&d(b))
            })
            .expect("generator yields points");
        let patch = extract_patch(&crack.mask, p.check_point, 64)?;
        let boundary = extract_boundary(&patch)?;
        let pca = pca_slope(&center_points(&boundary)?)?;
        print!(
            "{name}: {} boundary px, pca axis {:.2}° (λ ratio {:.1})",
            boundary.len(),
            pca.angle.to_degrees(),
            pca.eigen_ratio
        );
        match ransac_fit(&boundary, &RansacParams::default()) {
            Ok(line) => println!(
                ", ransac edge {:.2}° with {} inliers, low complexity: {}",
                line.angle.to_degrees(),
                line.inlier_count,
                is_low_complexity(pca.angle, line.angle, gamma)
            ),
            Err(e) => println!(", ransac: {e}"),
        }
    }
    Ok(())
}
