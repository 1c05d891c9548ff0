//! Main-axis estimate from the principal eigenvector of the boundary scatter matrix.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::boundary::CenteredMatrix;
use crate::error::{Error, Result};

/// Slope of a line in raster coordinates; vertical lines carry no finite slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slope {
    Finite(f64),
    Vertical,
}

impl Slope {
    /// Slope of the direction `(dx, dy)`; vertical when `|dx| < 1e-9`.
    pub fn from_direction(dx: f64, dy: f64) -> Self {
        if dx.abs() < 1e-9 {
            Slope::Vertical
        } else {
            Slope::Finite(dy / dx)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Slope::Finite(t) => Some(t),
            Slope::Vertical => None,
        }
    }
}

/// `θ = arctan t`, with the vertical limit mapped to π/2.
pub fn angle_from_slope(t: Slope) -> f64 {
    match t {
        Slope::Finite(t) => t.atan(),
        Slope::Vertical => FRAC_PI_2,
    }
}

/// Reduces any angle into `[0, π)`.
pub fn normalize_axis_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    // rem_euclid can round up to exactly PI for tiny negative inputs
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Unsigned distance between two undirected axes, in `[0, π/2]`.
pub fn axis_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientationEstimate {
    /// Axis direction in `[0, π)`.
    pub angle: f64,
    pub slope: Slope,
    /// `λ_max / λ_min`; infinite for collinear input.
    pub eigen_ratio: f64,
    pub principal_axis: (f64, f64),
    pub eigenvalues: (f64, f64),
}

/// Closed-form eigen-decomposition of the symmetric matrix `[[a, b], [b, c]]`.
///
/// Returns `(λ_max, λ_min, unit eigenvector of λ_max)`.
pub fn symmetric_eigen_2x2(a: f64, b: f64, c: f64) -> (f64, f64, (f64, f64)) {
    let half_trace = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    let l_max = half_trace + radius;
    let det = a * c - b * b;
    let l_min = if l_max > 0.0 {
        det / l_max
    } else {
        half_trace - radius
    };
    // the two algebraically equivalent eigenvector forms; keep the better-conditioned one
    let v1 = (b, l_max - a);
    let v2 = (l_max - c, b);
    let n1 = v1.0.hypot(v1.1);
    let n2 = v2.0.hypot(v2.1);
    let axis = if n1 == 0.0 && n2 == 0.0 {
        (1.0, 0.0)
    } else if n1 > n2 {
        (v1.0 / n1, v1.1 / n1)
    } else {
        (v2.0 / n2, v2.1 / n2)
    };
    (l_max, l_min, axis)
}

/// Leading eigenvector of `M̄M̄ᵀ`, i.e. the unit `r` maximizing `rᵀM̄M̄ᵀr`.
pub fn pca_slope(cm: &CenteredMatrix) -> Result<OrientationEstimate> {
    let n = cm.matrix.ncols();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let (sxx, sxy, syy) = cm.scatter();
    let scale = cm.mean.0 * cm.mean.0 + cm.mean.1 * cm.mean.1;
    if sxx + syy <= 1e-20 * (n as f64) * scale.max(1.0) {
        return Err(Error::ZeroCovariance);
    }
    let (l_max, l_min, (ax, ay)) = symmetric_eigen_2x2(sxx, sxy, syy);
    let angle = normalize_axis_angle(ay.atan2(ax));
    // orient the axis to match the reported angle
    let (ax, ay) = if ay < 0.0 || (ay == 0.0 && ax < 0.0) {
        (-ax, -ay)
    } else {
        (ax, ay)
    };
    let l_min = l_min.max(0.0);
    let eigen_ratio = if l_min == 0.0 {
        f64::INFINITY
    } else {
        l_max / l_min
    };
    Ok(OrientationEstimate {
        angle,
        slope: Slope::from_direction(ax, ay),
        eigen_ratio,
        principal_axis: (ax, ay),
        eigenvalues: (l_max, l_min),
    })
}
