//! Binary crack masks, square patches around check points, and patch rotation.
//!
//! Coordinates follow raster convention throughout the crate: `x` is the
//! column, `y` the row, and `y` grows downwards. An angle `a` names the
//! direction `(cos a, sin a)` in that frame, so positive angles turn
//! clockwise on screen.

use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, GrayImage, ImageEncoder, ImageReader};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gray level at or above which a pixel is read as crack.
pub const CRACK_THRESHOLD: u8 = 128;

/// Smallest allowed patch side.
pub const MIN_PATCH_SIZE: usize = 8;

/// Full-image crack raster; `true` marks a crack pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::MaskShape {
                width,
                height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// All-background mask.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Crack flag at `(x, y)`; out-of-bounds reads are background.
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.data[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        let w = self.width;
        self.data[y * w + x] = value;
    }

    pub fn crack_count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Validates `(x, y)` as a check point: in bounds and on the crack.
    pub fn check_point(&self, x: usize, y: usize) -> Result<CheckPoint> {
        if x >= self.width || y >= self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        if !self.get(x as i64, y as i64) {
            return Err(Error::NotCrackPixel { x, y });
        }
        Ok(CheckPoint { x, y })
    }

    fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(x as i64, y as i64) { 255 } else { 0 }])
        })
    }
}

/// A pixel where the width is to be measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CheckPoint {
    pub x: usize,
    pub y: usize,
}

impl CheckPoint {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Reads an 8-bit grayscale PNG or binary PGM and binarizes it at 128.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let read_err = |source| Error::ImageRead {
        path: path.to_path_buf(),
        source,
    };
    let img = ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(read_err)?;
    if img.color() != ColorType::L8 {
        return Err(Error::NotGrayscale {
            path: path.to_path_buf(),
            color: img.color(),
        });
    }
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    let data = gray
        .into_raw()
        .into_iter()
        .map(|v| v >= CRACK_THRESHOLD)
        .collect();
    BinaryMask::new(w as usize, h as usize, data)
}

/// Writes the mask as 0/255 gray. `.pgm` paths get binary P5, anything else PNG.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    write_gray(&mask.to_gray(), path.as_ref())
}

pub(crate) fn write_gray(img: &GrayImage, path: &Path) -> Result<()> {
    let write_err = |source| Error::ImageWrite {
        path: path.to_path_buf(),
        source,
    };
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        let file = std::fs::File::create(path)?;
        let encoder = PnmEncoder::new(std::io::BufWriter::new(file))
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
        encoder
            .write_image(
                img.as_raw(),
                img.width(),
                img.height(),
                ExtendedColorType::L8,
            )
            .map_err(write_err)
    } else {
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(write_err)
    }
}

/// `H x W` intensity block cut from a mask, values in `[0, 1]`.
///
/// `origin` is the source-mask position of the top-left pixel and may be
/// negative when the patch hangs over the image border.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    height: usize,
    width: usize,
    origin: (i64, i64),
    data: Vec<f64>,
}

impl Patch {
    pub fn new(height: usize, width: usize, origin: (i64, i64), data: Vec<f64>) -> Result<Self> {
        if height < MIN_PATCH_SIZE || width < MIN_PATCH_SIZE {
            return Err(Error::PatchTooSmall(height.min(width)));
        }
        if data.len() != height * width {
            return Err(Error::MaskShape {
                width,
                height,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::PatchRange);
        }
        Ok(Self {
            height,
            width,
            origin,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(height, width, (0, 0), data)
    }

    /// Builds a patch from a matrix, clamping into `[0, 1]`.
    pub fn from_matrix(m: &DMatrix<f64>, origin: (i64, i64)) -> Result<Self> {
        let (h, w) = m.shape();
        let data = (0..h)
            .flat_map(|y| (0..w).map(move |x| (y, x)))
            .map(|(y, x)| m[(y, x)].clamp(0.0, 1.0))
            .collect();
        Self::new(h, w, origin, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn origin(&self) -> (i64, i64) {
        self.origin
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Pixel that rotations pivot about; for an extracted patch this is the check point.
    pub fn center(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Intensity at integer coordinates, zero outside the frame.
    pub fn get_or_zero(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0.0
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    pub fn is_crack(&self, x: usize, y: usize) -> bool {
        self.get(x, y) >= 0.5
    }

    pub fn crack_count(&self) -> usize {
        self.data.iter().filter(|&&v| v >= 0.5).count()
    }

    /// Bilinear sample; the four taps read zero outside the frame.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as i64, y0 as i64);
        let a = self.get_or_zero(xi, yi);
        let b = self.get_or_zero(xi + 1, yi);
        let c = self.get_or_zero(xi, yi + 1);
        let d = self.get_or_zero(xi + 1, yi + 1);
        let top = a + fx * (b - a);
        let bottom = c + fx * (d - c);
        top + fy * (bottom - top)
    }

    /// Row-major `H x W` matrix view of the intensities.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.height, self.width, &self.data)
    }

    /// Copy with every pixel set to 1 or 0 at the 0.5 level.
    pub fn thresholded(&self) -> Patch {
        Patch {
            data: self
                .data
                .iter()
                .map(|&v| if v >= 0.5 { 1.0 } else { 0.0 })
                .collect(),
            ..self.clone()
        }
    }
}

/// Cuts a `size x size` patch whose center pixel is `cp`.
///
/// Crack pixels become 1.0; background and anything beyond the mask border 0.0.
pub fn extract_patch(mask: &BinaryMask, cp: CheckPoint, size: usize) -> Result<Patch> {
    if size < MIN_PATCH_SIZE {
        return Err(Error::PatchTooSmall(size));
    }
    mask.check_point(cp.x, cp.y)?;
    let half = (size / 2) as i64;
    let origin = (cp.x as i64 - half, cp.y as i64 - half);
    let mut data = Vec::with_capacity(size * size);
    for py in 0..size as i64 {
        for px in 0..size as i64 {
            let on = mask.get(origin.0 + px, origin.1 + py);
            data.push(if on { 1.0 } else { 0.0 });
        }
    }
    Patch::new(size, size, origin, data)
}

/// Rotates patch content by `angle` about [`Patch::center`], bilinear, zero fill.
///
/// A feature running along direction `a` runs along `a + angle` afterwards.
pub fn rotate_patch(patch: &Patch, angle: f64) -> Result<Patch> {
    if !angle.is_finite() {
        return Err(Error::NonFiniteAngle(angle));
    }
    let sampler = RotatedSampler::new(patch, angle);
    let mut data = Vec::with_capacity(patch.data.len());
    for y in 0..patch.height {
        for x in 0..patch.width {
            data.push(sampler.at(x, y));
        }
    }
    Ok(Patch {
        data,
        ..patch.clone()
    })
}

/// Per-pixel view of [`rotate_patch`] without materializing the whole patch.
pub(crate) struct RotatedSampler<'a> {
    patch: &'a Patch,
    center: (f64, f64),
    sin_cos: (f64, f64),
}

impl<'a> RotatedSampler<'a> {
    pub(crate) fn new(patch: &'a Patch, angle: f64) -> Self {
        let (cx, cy) = patch.center();
        Self {
            patch,
            center: (cx as f64, cy as f64),
            sin_cos: angle.sin_cos(),
        }
    }

    pub(crate) fn at(&self, x: usize, y: usize) -> f64 {
        let (cx, cy) = self.center;
        let (s, c) = self.sin_cos;
        let vx = x as f64 - cx;
        let vy = y as f64 - cy;
        // inverse map: rotate the output position by -angle
        let sx = cx + c * vx + s * vy;
        let sy = cy - s * vx + c * vy;
        self.patch.sample(sx, sy).clamp(0.0, 1.0)
    }
}

/// Where a patch position lands after [`rotate_patch`] with the same angle.
pub fn rotate_point(patch: &Patch, point: (f64, f64), angle: f64) -> (f64, f64) {
    let (cx, cy) = patch.center();
    let (cx, cy) = (cx as f64, cy as f64);
    let (s, c) = angle.sin_cos();
    let vx = point.0 - cx;
    let vy = point.1 - cy;
    (cx + c * vx - s * vy, cy + s * vx + c * vy)
}
