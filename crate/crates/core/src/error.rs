use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong between loading a mask and reporting a width.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read image {path}: {source}")]
    ImageRead {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("failed to write image {path}: {source}")]
    ImageWrite {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("image {path} is {color:?}, expected 8-bit single-channel")]
    NotGrayscale {
        path: PathBuf,
        color: image::ColorType,
    },
    #[error("image has zero size")]
    EmptyImage,
    #[error("mask data length {got} does not match {width}x{height}")]
    MaskShape {
        width: usize,
        height: usize,
        got: usize,
    },
    #[error("check point ({x},{y}) is outside the {width}x{height} mask")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("check point ({x},{y}) is not a crack pixel")]
    NotCrackPixel { x: usize, y: usize },
    #[error("patch size {0} is below the minimum of 8")]
    PatchTooSmall(usize),
    #[error("patch intensities must lie in [0, 1]")]
    PatchRange,
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("patch contains no crack pixels")]
    NoCrackPixels,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all points coincide; orientation is undefined")]
    ZeroCovariance,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no line consensus: best inlier fraction {best:.3} below {required:.3}")]
    NoConsensus { best: f64, required: f64 },
    #[error("empty angle grid")]
    EmptyGrid,
    #[error("solver diverged: non-finite value at outer iteration {outer}")]
    Divergence { outer: usize },
    #[error("rotated check point landed on background with no crack pixel within 1 px")]
    RotatedOffCrack,
    #[error("no sample on the line lies inside the crack")]
    LineMissesCrack,
    #[error("length mismatch: {0} widths vs {1} ground truths")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("shape does not fit the {width}x{height} canvas")]
    ShapeDoesNotFit { width: usize, height: usize },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
