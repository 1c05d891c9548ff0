//! Two-point RANSAC line fit with a total-least-squares refit on the consensus set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::PointSet;
use crate::error::{Error, Result};
use crate::pca::{normalize_axis_angle, symmetric_eigen_2x2, Slope};

/// Line in normal form: the points `p` with `n·(p - reference) = offset`,
/// where `n = (-sin angle, cos angle)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineModel {
    pub angle: f64,
    pub offset: f64,
    pub slope: Slope,
    pub inlier_count: usize,
    pub reference: (f64, f64),
}

impl LineModel {
    /// Line through `point` along direction `angle`.
    pub fn through(point: (f64, f64), angle: f64, reference: (f64, f64)) -> Self {
        let angle = normalize_axis_angle(angle);
        let (s, c) = angle.sin_cos();
        let offset = -s * (point.0 - reference.0) + c * (point.1 - reference.1);
        Self {
            angle,
            offset,
            slope: Slope::from_direction(c, s),
            inlier_count: 0,
            reference,
        }
    }

    pub fn normal(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (-s, c)
    }

    pub fn direction(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (c, s)
    }

    /// Foot of the perpendicular from the reference point.
    pub fn anchor(&self) -> (f64, f64) {
        let (nx, ny) = self.normal();
        (
            self.reference.0 + self.offset * nx,
            self.reference.1 + self.offset * ny,
        )
    }

    fn signed_distance(&self, p: (f64, f64)) -> f64 {
        let (nx, ny) = self.normal();
        nx * (p.0 - self.reference.0) + ny * (p.1 - self.reference.1) - self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    pub iterations: usize,
    /// Perpendicular distance, in pixels, within which a point supports a hypothesis.
    pub inlier_tol: f64,
    pub min_inlier_frac: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 500,
            inlier_tol: 1.5,
            min_inlier_frac: 0.3,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter(
                "ransac iterations must be >= 1".into(),
            ));
        }
        if !self.inlier_tol.is_finite() || self.inlier_tol <= 0.0 {
            return Err(Error::InvalidParameter(
                "ransac inlier_tol must be > 0".into(),
            ));
        }
        if !(self.min_inlier_frac > 0.0 && self.min_inlier_frac <= 1.0) {
            return Err(Error::InvalidParameter(
                "ransac min_inlier_frac must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

pub fn point_line_distance(p: (f64, f64), line: &LineModel) -> f64 {
    line.signed_distance(p).abs()
}

/// Total-least-squares line through `points`; `None` when they all coincide.
pub fn fit_line_tls(points: &[(f64, f64)], reference: (f64, f64)) -> Option<LineModel> {
    if points.len() < 2 {
        return None;
    }
    let inv = 1.0 / points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() * inv;
    let my = points.iter().map(|p| p.1).sum::<f64>() * inv;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    if a + c == 0.0 {
        return None;
    }
    let (_, _, (ax, ay)) = symmetric_eigen_2x2(a, b, c);
    let mut line = LineModel::through((mx, my), ay.atan2(ax), reference);
    line.inlier_count = points.len();
    Some(line)
}

/// Points of `ps` within `tol` of `line`.
pub fn inliers(ps: &PointSet, line: &LineModel, tol: f64) -> Vec<(f64, f64)> {
    ps.points()
        .iter()
        .copied()
        .filter(|&p| point_line_distance(p, line) <= tol)
        .collect()
}

#[derive(Clone, Copy)]
struct Hypothesis {
    count: usize,
    anchor: (f64, f64),
    normal: (f64, f64),
}

pub fn ransac_fit(ps: &PointSet, params: &RansacParams) -> Result<LineModel> {
    params.validate()?;
    let pts = ps.points();
    let n = pts.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<Hypothesis> = None;
    for _ in 0..params.iterations {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (p, q) = (pts[i], pts[j]);
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let len = dx.hypot(dy);
        if len == 0.0 {
            continue;
        }
        let normal = (-dy / len, dx / len);
        let count = pts
            .iter()
            .filter(|r| {
                (normal.0 * (r.0 - p.0) + normal.1 * (r.1 - p.1)).abs() <= params.inlier_tol
            })
            .count();
        if best.is_none_or(|b| count > b.count) {
            best = Some(Hypothesis {
                count,
                anchor: p,
                normal,
            });
        }
    }
    let Some(Hypothesis {
        count,
        anchor: p,
        normal,
    }) = best
    else {
        return Err(Error::NoConsensus {
            best: 0.0,
            required: params.min_inlier_frac,
        });
    };
    let frac = count as f64 / n as f64;
    if frac < params.min_inlier_frac {
        return Err(Error::NoConsensus {
            best: frac,
            required: params.min_inlier_frac,
        });
    }
    let consensus: Vec<_> = pts
        .iter()
        .copied()
        .filter(|r| (normal.0 * (r.0 - p.0) + normal.1 * (r.1 - p.1)).abs() <= params.inlier_tol)
        .collect();
    let mut line = fit_line_tls(&consensus, ps.reference()).ok_or(Error::ZeroCovariance)?;
    line.inlier_count = count;
    Ok(line)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    /// Angle sweep minimizing the summed squared perpendicular residuals.
    fn brute_tls_angle(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let steps = 200_000;
        (0..steps)
            .map(|k| k as f64 * std::f64::consts::PI / steps as f64)
            .map(|a| {
                let (s, c) = a.sin_cos();
                let cost: f64 = points
                    .iter()
                    .map(|&(x, y)| (-s * (x - mx) + c * (y - my)).powi(2))
                    .sum();
                (cost, a)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1
    }

    fn line_points() -> Vec<(f64, f64)> {
        (0..20)
            .map(|i| (i as f64 * 0.5, 2.0 * i as f64 * 0.5 + 1.0))
            .collect()
    }

    #[test]
    fn exact_line_is_recovered() {
        let ps = PointSet::new(line_points());
        let line = ransac_fit(&ps, &RansacParams::default()).unwrap();
        assert_eq!(line.inlier_count, 20);
        assert!((line.slope.value().unwrap() - 2.0).abs() < 1e-9);
        // y = 2x + 1 has normal (-2, 1)/√5 and passes through (0, 1)
        assert!((line.offset - 1.0 / 5f64.sqrt()).abs() < 1e-9);
        assert!(point_line_distance((0.0, 1.0), &line) < 1e-9);
    }

    #[test]
    fn outliers_are_ignored() {
        let mut pts = line_points();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut outliers = 0;
        while outliers < 6 {
            let p: (f64, f64) = (rng.random_range(-5.0..15.0), rng.random_range(-5.0..25.0));
            // keep outliers genuinely off the line
            if (p.1 - 2.0 * p.0 - 1.0).abs() / 5f64.sqrt() > 3.0 {
                pts.push(p);
                outliers += 1;
            }
        }
        let params = RansacParams {
            inlier_tol: 1.5,
            seed: 3,
            ..RansacParams::default()
        };
        let line = ransac_fit(&PointSet::new(pts), &params).unwrap();
        let oracle = brute_tls_angle(&line_points()).tan();
        assert!((oracle - 2.0).abs() < 1e-3);
        assert!((line.slope.value().unwrap() - oracle).abs() < 0.05);
    }

    #[test]
    fn no_consensus_on_scattered_points() {
        let ps = PointSet::new(vec![(0.0, 0.0), (100.0, 3.0), (40.0, 90.0)]);
        let params = RansacParams {
            min_inlier_frac: 0.9,
            ..RansacParams::default()
        };
        assert!(matches!(
            ransac_fit(&ps, &params),
            Err(Error::NoConsensus { .. })
        ));
    }

    #[test]
    fn too_few_points_and_bad_params() {
        assert!(ransac_fit(&PointSet::new(vec![(1.0, 1.0)]), &RansacParams::default()).is_err());
        let bad = RansacParams {
            inlier_tol: 0.0,
            ..RansacParams::default()
        };
        assert!(ransac_fit(&PointSet::new(line_points()), &bad).is_err());
    }

    #[test]
    fn distances() {
        let horizontal = LineModel::through((0.0, 0.0), 0.0, (0.0, 0.0));
        assert_eq!(point_line_distance((0.0, 1.0), &horizontal), 1.0);
        assert_eq!(point_line_distance((7.0, 0.0), &horizontal), 0.0);
        let vertical = LineModel::through((0.0, 0.0), FRAC_PI_2, (0.0, 0.0));
        assert!((point_line_distance((3.0, 4.0), &vertical) - 3.0).abs() < 1e-12);
        assert_eq!(vertical.slope, Slope::Vertical);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let mut pts = line_points();
        pts.extend([(3.0, -4.0), (8.0, 2.0), (1.0, 12.0)]);
        let ps = PointSet::new(pts);
        let p = RansacParams {
            seed: 11,
            ..RansacParams::default()
        };
        let a = ransac_fit(&ps, &p).unwrap();
        let b = ransac_fit(&ps, &p).unwrap();
        assert_eq!(a.angle.to_bits(), b.angle.to_bits());
        assert_eq!(a.offset.to_bits(), b.offset.to_bits());
        assert_eq!(a.inlier_count, b.inlier_count);
    }

    #[test]
    fn refit_is_a_fixed_point() {
        let ps = PointSet::new(line_points());
        let line = ransac_fit(&ps, &RansacParams::default()).unwrap();
        let again = fit_line_tls(&inliers(&ps, &line, 1.5), ps.reference()).unwrap();
        assert!((again.angle - line.angle).abs() < 1e-6);
        let tls = fit_line_tls(ps.points(), ps.reference()).unwrap();
        assert_eq!(tls.angle, line.angle);
    }
}
