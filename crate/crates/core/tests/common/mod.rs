#![allow(dead_code)]

use crackwidth::{BinaryMask, CheckPoint, Patch};
use rand::Rng;

/// `size`×`size` patch holding a straight band through the patch center (plus
/// `offset` along the normal) at `angle_deg`, with `|d| <= half_width`.
pub fn strip_patch(size: usize, angle_deg: f64, half_width: f64, offset: f64) -> Patch {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let center = (size / 2) as f64;
    Patch::from_fn(size, size, |x, y| {
        let (dx, dy) = (x as f64 - center, y as f64 - center);
        if (-s * dx + c * dy - offset).abs() <= half_width {
            1.0
        } else {
            0.0
        }
    })
    .unwrap()
}

/// Sets a `frac` share of pixels to 0 or 1 at random. Returns the corrupted
/// patch and the signed corruption `noisy - clean`.
pub fn salt_and_pepper(patch: &Patch, frac: f64, rng: &mut impl Rng) -> (Patch, Vec<f64>) {
    let data: Vec<f64> = patch
        .data()
        .iter()
        .map(|&v| {
            if rng.random_bool(frac) {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    0.0
                }
            } else {
                v
            }
        })
        .collect();
    let diff = data.iter().zip(patch.data()).map(|(a, b)| a - b).collect();
    (
        Patch::new(patch.height(), patch.width(), patch.origin(), data).unwrap(),
        diff,
    )
}

/// Distance between the two exits of the line through `cp` with direction
/// `normal`, marching in 0.01 px steps. The raster is sampled bilinearly and
/// thresholded at 0.5; nearest-pixel lookup quantizes diagonal chords to
/// multiples of sqrt(2).
pub fn normal_chord(mask: &BinaryMask, cp: CheckPoint, normal: (f64, f64)) -> f64 {
    let step = 0.01;
    let at = |x: i64, y: i64| if mask.get(x, y) { 1.0 } else { 0.0 };
    let sample = |x: f64, y: f64| {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        (1.0 - fx) * (1.0 - fy) * at(x0, y0)
            + fx * (1.0 - fy) * at(x0 + 1, y0)
            + (1.0 - fx) * fy * at(x0, y0 + 1)
            + fx * fy * at(x0 + 1, y0 + 1)
    };
    let exit = |sign: f64| {
        let mut t = 0.0;
        loop {
            let x = cp.x as f64 + sign * t * normal.0;
            let y = cp.y as f64 + sign * t * normal.1;
            if sample(x, y) < 0.5 {
                return t;
            }
            t += step;
        }
    };
    exit(1.0) + exit(-1.0)
}

/// Smallest difference between two axis angles (degrees) modulo `period`.
pub fn angle_gap_deg(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}
