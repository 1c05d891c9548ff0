//! Crack boundary pixels and the mean-centered coordinate matrix built from them.

use nalgebra::Matrix2xX;

use crate::error::{Error, Result};
use crate::mask::Patch;

/// Unordered set of distinct pixel coordinates inside a patch.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<(f64, f64)>,
    /// Reference position for signed line offsets (the patch center for boundary sets).
    reference: (f64, f64),
}

impl PointSet {
    /// Wraps raw points with the origin as reference.
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        Self {
            points,
            reference: (0.0, 0.0),
        }
    }

    pub fn with_reference(points: Vec<(f64, f64)>, reference: (f64, f64)) -> Self {
        Self { points, reference }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn reference(&self) -> (f64, f64) {
        self.reference
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Crack pixels with at least one background 4-neighbor; the patch border counts as background.
pub fn extract_boundary(patch: &Patch) -> Result<PointSet> {
    let (w, h) = (patch.width(), patch.height());
    let crack = |x: i64, y: i64| {
        x >= 0
            && y >= 0
            && (x as usize) < w
            && (y as usize) < h
            && patch.is_crack(x as usize, y as usize)
    };
    let mut points = Vec::new();
    let mut any = false;
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !crack(x, y) {
                continue;
            }
            any = true;
            let edge = !crack(x - 1, y) || !crack(x + 1, y) || !crack(x, y - 1) || !crack(x, y + 1);
            if edge {
                points.push((x as f64, y as f64));
            }
        }
    }
    if !any {
        return Err(Error::NoCrackPixels);
    }
    let (cx, cy) = patch.center();
    Ok(PointSet::with_reference(points, (cx as f64, cy as f64)))
}

/// `2 x N` coordinates with the centroid subtracted.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredMatrix {
    pub matrix: Matrix2xX<f64>,
    pub mean: (f64, f64),
}

impl CenteredMatrix {
    /// Entries of the `2 x 2` scatter matrix `M Mᵀ` as `(sxx, sxy, syy)`.
    pub fn scatter(&self) -> (f64, f64, f64) {
        let m = &self.matrix;
        let xs = m.row(0);
        let ys = m.row(1);
        (xs.dot(&xs), xs.dot(&ys), ys.dot(&ys))
    }
}

pub fn center_points(ps: &PointSet) -> Result<CenteredMatrix> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let inv = 1.0 / n as f64;
    let mean_x = ps.points.iter().map(|p| p.0).sum::<f64>() * inv;
    let mean_y = ps.points.iter().map(|p| p.1).sum::<f64>() * inv;
    let matrix = Matrix2xX::from_iterator(
        n,
        ps.points
            .iter()
            .flat_map(|&(x, y)| [x - mean_x, y - mean_y]),
    );
    Ok(CenteredMatrix {
        matrix,
        mean: (mean_x, mean_y),
    })
}
