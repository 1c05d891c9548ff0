//! Measures a single check point on a generated 25° strip.
//!
//! ```text
//! cargo run --example measure_point
//! ```

use crackwidth::{measure, synth_crack, CascadeConfig, SyntheticSpec};

fn main() -> crackwidth::Result<()> {
    let crack = synth_crack(&SyntheticSpec::strip(7.0, 25.0))?;
    let cfg = CascadeConfig::default();
    for p in crack.points.iter().take(4) {
        let m = measure(&crack.mask, p.check_point, &cfg)?;
        println!(
            "({:>3},{:>3})  width {:>2} px (truth {})  axis {:6.2}°  via {:?}",
            p.check_point.x, p.check_point.y, m.width_px, p.gt_width_px, m.mpa_angle_deg, m.method
        );
    }
    Ok(())
}
