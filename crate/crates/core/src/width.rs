//! Width counting perpendicular to the main axis, the boundary-distance cost
//! of a candidate axis, the area-over-skeleton baseline, and error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{rotate_point, CheckPoint, Patch, RotatedSampler};
use crate::ransac::LineModel;

/// One width reading in the frame where the main axis is horizontal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthSample {
    pub width_px: usize,
    pub column: usize,
    /// Rotated-frame row of the check point.
    pub row: usize,
    pub run_start: usize,
    pub run_end: usize,
}

/// Rotates the patch so the axis at `mpa_angle` becomes horizontal, thresholds
/// at 0.5, and counts the vertical crack run through the rotated check point.
pub fn measure_width_at(patch: &Patch, cp: CheckPoint, mpa_angle: f64) -> Result<WidthSample> {
    if cp.x >= patch.width() || cp.y >= patch.height() || !patch.is_crack(cp.x, cp.y) {
        return Err(Error::NotCrackPixel { x: cp.x, y: cp.y });
    }
    if !mpa_angle.is_finite() {
        return Err(Error::NonFiniteAngle(mpa_angle));
    }
    // only the check point's column and its neighbours are read, so the
    // rotated patch is sampled on demand
    let rotated = RotatedSampler::new(patch, -mpa_angle);
    let (w, h) = (patch.width(), patch.height());
    let crack_at = |x: usize, y: usize| rotated.at(x, y) >= 0.5;
    let (fx, fy) = rotate_point(patch, (cp.x as f64, cp.y as f64), -mpa_angle);
    let (column, row) = snap_to_crack(w, h, &crack_at, fx, fy).ok_or(Error::RotatedOffCrack)?;
    let mut run_start = row;
    while run_start > 0 && crack_at(column, run_start - 1) {
        run_start -= 1;
    }
    let mut run_end = row;
    while run_end + 1 < h && crack_at(column, run_end + 1) {
        run_end += 1;
    }
    Ok(WidthSample {
        width_px: run_end - run_start + 1,
        column,
        row,
        run_start,
        run_end,
    })
}

/// The pixel nearest `(fx, fy)`, or failing that the closest crack pixel among its 8-neighbors.
fn snap_to_crack(
    width: usize,
    height: usize,
    is_crack: &impl Fn(usize, usize) -> bool,
    fx: f64,
    fy: f64,
) -> Option<(usize, usize)> {
    let (w, h) = (width as i64, height as i64);
    let (rx, ry) = (fx.round() as i64, fy.round() as i64);
    let crack_at =
        |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && is_crack(x as usize, y as usize);
    if crack_at(rx, ry) {
        return Some((rx as usize, ry as usize));
    }
    let mut best: Option<(f64, (usize, usize))> = None;
    for dy in -1..=1i64 {
        for dx in -1..=1i64 {
            let (x, y) = (rx + dx, ry + dy);
            if !crack_at(x, y) {
                continue;
            }
            let d = (x as f64 - fx).hypot(y as f64 - fy);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, (x as usize, y as usize)));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Boundary-distance cost of a candidate axis, with bookkeeping of skipped samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpaCost {
    /// `Σ |p_i - c_i| + |p_i - d_i|` over the samples that found both crossings.
    pub cost: f64,
    pub used: usize,
    /// Samples whose perpendicular left the patch before meeting the boundary.
    pub skipped: usize,
}

const LINE_STEP: f64 = 0.25;
const MARCH_STEP: f64 = 0.05;

/// Samples `n_samples` points on `line` inside the crack and sums, for each,
/// the distances to the first boundary crossings on either side along the
/// perpendicular. Crossings sit where the bilinear intensity drops to 0.5.
pub fn mpa_cost(patch: &Patch, line: &LineModel, n_samples: usize) -> Result<MpaCost> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let (w, h) = (patch.width() as f64, patch.height() as f64);
    let inside = |p: (f64, f64)| p.0 >= 0.0 && p.1 >= 0.0 && p.0 <= w - 1.0 && p.1 <= h - 1.0;
    let anchor = line.anchor();
    let dir = line.direction();
    let normal = line.normal();
    let reach = w.hypot(h);
    let steps = (2.0 * reach / LINE_STEP).ceil() as i64;
    let on_crack: Vec<(f64, f64)> = (0..=steps)
        .map(|k| -reach + k as f64 * LINE_STEP)
        .map(|s| (anchor.0 + s * dir.0, anchor.1 + s * dir.1))
        .filter(|&p| inside(p) && patch.sample(p.0, p.1) >= 0.5)
        .collect();
    if on_crack.is_empty() {
        return Err(Error::LineMissesCrack);
    }
    let mut out = MpaCost {
        cost: 0.0,
        used: 0,
        skipped: 0,
    };
    let len = on_crack.len();
    for i in 0..n_samples {
        let idx = (((i as f64 + 0.5) * len as f64 / n_samples as f64) as usize).min(len - 1);
        let p = on_crack[idx];
        let up = march_to_boundary(patch, p, normal, reach, &inside);
        let down = march_to_boundary(patch, p, (-normal.0, -normal.1), reach, &inside);
        match (up, down) {
            (Some(a), Some(b)) => {
                out.cost += a + b;
                out.used += 1;
            }
            _ => out.skipped += 1,
        }
    }
    Ok(out)
}

fn march_to_boundary(
    patch: &Patch,
    p: (f64, f64),
    dir: (f64, f64),
    reach: f64,
    inside: &impl Fn((f64, f64)) -> bool,
) -> Option<f64> {
    let at = |t: f64| (p.0 + t * dir.0, p.1 + t * dir.1);
    let value = |t: f64| {
        let q = at(t);
        patch.sample(q.0, q.1)
    };
    let mut t = 0.0;
    while t < reach {
        let next = t + MARCH_STEP;
        if !inside(at(next)) {
            return None;
        }
        if value(next) < 0.5 {
            let (mut lo, mut hi) = (t, next);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if value(mid) >= 0.5 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        t = next;
    }
    None
}

/// One-pixel-wide skeleton by Guo–Hall thinning; pixels outside the grid are background.
pub fn thin(width: usize, height: usize, pixels: &[bool]) -> Vec<bool> {
    let mut img = pixels.to_vec();
    let at = |img: &[bool], x: i64, y: i64| {
        x >= 0
            && y >= 0
            && (x as usize) < width
            && (y as usize) < height
            && img[y as usize * width + x as usize]
    };
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_clear.clear();
            for y in 0..height as i64 {
                for x in 0..width as i64 {
                    if !at(&img, x, y) {
                        continue;
                    }
                    // p2..p9 clockwise from north
                    let [p2, p3, p4, p5, p6, p7, p8, p9] = [
                        at(&img, x, y - 1),
                        at(&img, x + 1, y - 1),
                        at(&img, x + 1, y),
                        at(&img, x + 1, y + 1),
                        at(&img, x, y + 1),
                        at(&img, x - 1, y + 1),
                        at(&img, x - 1, y),
                        at(&img, x - 1, y - 1),
                    ];
                    let crossings = (!p2 && (p3 || p4)) as u8
                        + (!p4 && (p5 || p6)) as u8
                        + (!p6 && (p7 || p8)) as u8
                        + (!p8 && (p9 || p2)) as u8;
                    if crossings != 1 {
                        continue;
                    }
                    let n1 =
                        (p9 || p2) as u8 + (p3 || p4) as u8 + (p5 || p6) as u8 + (p7 || p8) as u8;
                    let n2 =
                        (p2 || p3) as u8 + (p4 || p5) as u8 + (p6 || p7) as u8 + (p8 || p9) as u8;
                    if !(2..=3).contains(&n1.min(n2)) {
                        continue;
                    }
                    let keep = if pass == 0 {
                        (p2 || p3 || !p5) && p4
                    } else {
                        (p6 || p7 || !p9) && p8
                    };
                    if !keep {
                        to_clear.push(y as usize * width + x as usize);
                    }
                }
            }
            for &i in &to_clear {
                img[i] = false;
            }
            changed |= !to_clear.is_empty();
        }
        if !changed {
            break;
        }
    }
    img
}

/// Skeleton-based baseline: crack area divided by skeleton length.
pub fn sbm_width(patch: &Patch) -> Result<f64> {
    let crack: Vec<bool> = patch.data().iter().map(|&v| v >= 0.5).collect();
    let area = crack.iter().filter(|&&b| b).count();
    if area == 0 {
        return Err(Error::NoCrackPixels);
    }
    let skeleton = thin(patch.width(), patch.height(), &crack);
    // thinning can erase a tiny blob entirely; it still has unit length
    let length = skeleton.iter().filter(|&&b| b).count().max(1);
    Ok(area as f64 / length as f64)
}

fn check_lengths(widths: &[f64], gts: &[f64]) -> Result<()> {
    if widths.len() != gts.len() {
        return Err(Error::LengthMismatch(widths.len(), gts.len()));
    }
    if widths.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(widths: &[f64], gts: &[f64]) -> Result<f64> {
    check_lengths(widths, gts)?;
    let sum: f64 = widths.iter().zip(gts).map(|(w, g)| (w - g).abs()).sum();
    Ok(sum / widths.len() as f64)
}

/// Mean squared error.
pub fn mse(widths: &[f64], gts: &[f64]) -> Result<f64> {
    check_lengths(widths, gts)?;
    let sum: f64 = widths.iter().zip(gts).map(|(w, g)| (w - g).powi(2)).sum();
    Ok(sum / widths.len() as f64)
}
