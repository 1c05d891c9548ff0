//! PNG overlays of measurements on top of the mask.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::cascade::Measurement;
use crate::error::{Error, Result};
use crate::mask::BinaryMask;

pub const CRACK: Rgb<u8> = Rgb([255, 255, 255]);
pub const BACKGROUND: Rgb<u8> = Rgb([0, 0, 0]);
pub const AXIS: Rgb<u8> = Rgb([255, 0, 0]);
pub const WIDTH: Rgb<u8> = Rgb([0, 0, 255]);

/// Half-length of the drawn axis segment, pixels.
const AXIS_HALF_LEN: f64 = 12.0;

fn draw_segment(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), color: Rgb<u8>) {
    let len = (b.0 - a.0).hypot(b.1 - a.1);
    let steps = (len * 4.0).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let x = (a.0 + t * (b.0 - a.0)).round();
        let y = (a.1 + t * (b.1 - a.1)).round();
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
    }
}

/// Draws the crack in white, each width chord in blue, each axis in red,
/// and a red dot on every check point.
pub fn overlay_image(mask: &BinaryMask, measurements: &[Measurement]) -> RgbImage {
    let mut img = RgbImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        if mask.get(x as i64, y as i64) {
            CRACK
        } else {
            BACKGROUND
        }
    });
    for m in measurements {
        let p = (m.check_point.x as f64, m.check_point.y as f64);
        let (s, c) = m.mpa_angle_deg.to_radians().sin_cos();
        let half_w = m.width_px as f64 / 2.0;
        let normal = (-s, c);
        draw_segment(
            &mut img,
            (p.0 - half_w * normal.0, p.1 - half_w * normal.1),
            (p.0 + half_w * normal.0, p.1 + half_w * normal.1),
            WIDTH,
        );
        draw_segment(
            &mut img,
            (p.0 - AXIS_HALF_LEN * c, p.1 - AXIS_HALF_LEN * s),
            (p.0 + AXIS_HALF_LEN * c, p.1 + AXIS_HALF_LEN * s),
            AXIS,
        );
        for (dx, dy) in [(0i64, 0i64), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (x, y) = (m.check_point.x as i64 + dx, m.check_point.y as i64 + dy);
            if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                img.put_pixel(x as u32, y as u32, AXIS);
            }
        }
    }
    img
}

pub fn render_overlay(
    mask: &BinaryMask,
    measurements: &[Measurement],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    overlay_image(mask, measurements)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::ImageWrite {
            path: path.to_path_buf(),
            source,
        })
}
