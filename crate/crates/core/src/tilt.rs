//! Rotation-only transform-invariant low-rank texture recovery.
//!
//! The warped patch `D∘τ(θ)` is split into a low-rank part `A` and a sparse
//! part `E`. Each outer iteration linearizes the warp around the current
//! angle, `D∘τ + J·Δθ = A + E`, and solves
//!
//! ```text
//! min ‖A‖* + λ‖E‖₁   s.t.   D∘τ + J·Δθ = A + E
//! ```
//!
//! with an inexact augmented-Lagrangian (ADMM) loop: singular-value
//! thresholding for `A`, soft thresholding for `E`, a one-dimensional least
//! squares for `Δθ`, then a multiplier ascent step. The angle increment is
//! accepted only when the objective does not increase; otherwise it is halved.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Patch;
use crate::pca::normalize_axis_angle;

/// In-plane rotation, stored both as an angle and as the homogeneous
/// `[[cos, sin, 0], [-sin, cos, 0], [0, 0, 1]]` matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationParam {
    pub theta: f64,
    pub matrix: Matrix3<f64>,
}

impl RotationParam {
    pub fn new(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        #[rustfmt::skip]
        let matrix = Matrix3::new(
            c,   s,   0.0,
            -s,  c,   0.0,
            0.0, 0.0, 1.0,
        );
        Self { theta, matrix }
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::new(deg.to_radians())
    }

    /// Rotation by `self.theta + other.theta`, angle read back from the product matrix.
    pub fn compose(&self, other: &RotationParam) -> RotationParam {
        let matrix = self.matrix * other.matrix;
        RotationParam {
            theta: matrix[(0, 1)].atan2(matrix[(0, 0)]),
            matrix,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltConfig {
    /// Sparse weight; `None` means `1/√max(H, W)`.
    pub lambda: Option<f64>,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Radians.
    pub outer_tol: f64,
    pub outer_max_iters: usize,
    /// Initial penalty; `None` means `1.25/‖D‖₂` of the normalized warped patch.
    pub mu_init: Option<f64>,
    pub mu_growth: f64,
    /// Pre-rotation candidates, degrees.
    pub angle_grid: Vec<f64>,
    /// Keep `(A, E)` from every outer iteration in [`TiltResult::iterates`].
    #[serde(default)]
    pub keep_iterates: bool,
}

impl Default for TiltConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            inner_tol: 1e-6,
            inner_max_iters: 500,
            outer_tol: 1e-3,
            outer_max_iters: 50,
            mu_init: None,
            mu_growth: 1.25,
            angle_grid: default_angle_grid(),
            keep_iterates: false,
        }
    }
}

/// `0, 5, 10, …, 90` degrees.
pub fn default_angle_grid() -> Vec<f64> {
    (0..=18).map(|k| k as f64 * 5.0).collect()
}

impl TiltConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad("lambda must be > 0");
            }
        }
        if self.inner_tol.is_nan()
            || self.inner_tol <= 0.0
            || self.outer_tol.is_nan()
            || self.outer_tol <= 0.0
        {
            return bad("tolerances must be > 0");
        }
        if self.inner_max_iters == 0 || self.outer_max_iters == 0 {
            return bad("iteration limits must be >= 1");
        }
        if let Some(mu) = self.mu_init {
            if !(mu > 0.0 && mu.is_finite()) {
                return bad("mu_init must be > 0");
            }
        }
        if !(self.mu_growth > 1.0 && self.mu_growth.is_finite()) {
            return bad("mu_growth must be > 1");
        }
        if self.angle_grid.iter().any(|a| !a.is_finite()) {
            return bad("angle grid entries must be finite");
        }
        Ok(())
    }

    pub fn lambda_for(&self, height: usize, width: usize) -> f64 {
        self.lambda
            .unwrap_or_else(|| 1.0 / (height.max(width) as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TiltResult {
    pub low_rank: DMatrix<f64>,
    pub sparse: DMatrix<f64>,
    /// `init_theta + Σ increments`, radians, unreduced.
    pub theta_total: f64,
    pub init_theta: f64,
    /// Accepted angle increments, one per outer step.
    pub increments: Vec<f64>,
    /// `‖A‖* + λ‖E‖₁` after each outer iteration.
    pub objective_trace: Vec<f64>,
    /// Relative linearized-constraint residual of the final inner solve.
    pub final_residual: f64,
    pub converged: bool,
    pub lambda: f64,
    pub iterates: Vec<(DMatrix<f64>, DMatrix<f64>)>,
}

/// Singular-value soft thresholding `U·max(Σ - tau, 0)·Vᵀ`.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut svd = m.clone().svd(true, true);
    for s in svd.singular_values.iter_mut() {
        *s = (*s - tau).max(0.0);
    }
    svd.recompose().expect("svd computed with both factors")
}

/// Elementwise `sign(x)·max(|x| - tau, 0)`.
pub fn soft_threshold(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    m.map(|x| shrink(x, tau))
}

fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().sum()
}

fn l1_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

/// `D∘τ(θ)`: the patch sampled at `c + R(θ)(p - c)` for every pixel `p`,
/// with `R(θ) = τᵀ` the upper-left block of the rotation matrix transposed.
///
/// A structure running along angle `θ` in the patch runs horizontally in the result.
pub fn warp(patch: &Patch, theta: f64) -> DMatrix<f64> {
    let (h, w) = (patch.height(), patch.width());
    let (cx, cy) = patch.center();
    let (cx, cy) = (cx as f64, cy as f64);
    let (s, c) = theta.sin_cos();
    DMatrix::from_fn(h, w, |y, x| {
        let vx = x as f64 - cx;
        let vy = y as f64 - cy;
        patch.sample(cx + c * vx - s * vy, cy + s * vx + c * vy)
    })
}

/// `∂(D∘τ)/∂θ` at `rp.theta`: central-difference gradients of the warped
/// patch dotted with the rotation velocity field `(-(y - cy), x - cx)`.
pub fn rotation_jacobian(patch: &Patch, rp: &RotationParam) -> DMatrix<f64> {
    let warped = warp(patch, rp.theta);
    jacobian_of_warped(&warped, patch.center())
}

fn jacobian_of_warped(warped: &DMatrix<f64>, center: (usize, usize)) -> DMatrix<f64> {
    let (h, w) = warped.shape();
    let at = |y: i64, x: i64| {
        if y < 0 || x < 0 || y as usize >= h || x as usize >= w {
            0.0
        } else {
            warped[(y as usize, x as usize)]
        }
    };
    let (cx, cy) = (center.0 as f64, center.1 as f64);
    DMatrix::from_fn(h, w, |y, x| {
        let (yi, xi) = (y as i64, x as i64);
        let gx = 0.5 * (at(yi, xi + 1) - at(yi, xi - 1));
        let gy = 0.5 * (at(yi + 1, xi) - at(yi - 1, xi));
        let vx = x as f64 - cx;
        let vy = y as f64 - cy;
        gx * -vy + gy * vx
    })
}

/// Picks the grid angle (degrees) whose Frobenius-normalized warp has the
/// smallest nuclear norm. Ties keep the lowest angle.
pub fn pre_rotation_search(patch: &Patch, angle_grid: &[f64]) -> Result<RotationParam> {
    if angle_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<(f64, f64)> = None;
    for &deg in angle_grid {
        let warped = warp(patch, deg.to_radians());
        let fro = warped.norm();
        let score = if fro > 0.0 {
            nuclear_norm(&warped) / fro
        } else {
            0.0
        };
        let better = match best {
            None => true,
            Some((best_score, best_deg)) => {
                let slack = 1e-12 * best_score.max(1.0);
                score < best_score - slack
                    || ((score - best_score).abs() <= slack && deg < best_deg)
            }
        };
        if better {
            best = Some((score, deg));
        }
    }
    let (_, deg) = best.expect("grid is non-empty");
    Ok(RotationParam::from_degrees(deg))
}

struct LinearizedSolution {
    low_rank: DMatrix<f64>,
    sparse: DMatrix<f64>,
    delta_theta: f64,
    objective: f64,
    residual: f64,
}

/// Cap on the penalty relative to its starting value.
const MU_CEILING: f64 = 1e7;
/// Step halvings tried before an outer step is declared stalled.
const MAX_HALVINGS: usize = 6;

fn solve_linearized(
    patch: &Patch,
    theta: f64,
    lambda: f64,
    cfg: &TiltConfig,
    outer: usize,
) -> Result<LinearizedSolution> {
    let raw = warp(patch, theta);
    let norm = raw.norm();
    let (h, w) = raw.shape();
    if norm == 0.0 {
        return Ok(LinearizedSolution {
            low_rank: DMatrix::zeros(h, w),
            sparse: DMatrix::zeros(h, w),
            delta_theta: 0.0,
            objective: 0.0,
            residual: 0.0,
        });
    }
    let data = &raw / norm;
    // derivative of D∘τ / ‖D∘τ‖_F
    let raw_jac = jacobian_of_warped(&raw, patch.center()) / norm;
    let jac = &raw_jac - &data * data.dot(&raw_jac);
    let jac_sq = jac.norm_squared();

    let spectral = data.singular_values().max();
    let mu0 = cfg.mu_init.unwrap_or(1.25 / spectral);
    let mu_max = mu0 * MU_CEILING;
    let mut mu = mu0;
    let mut low_rank = DMatrix::zeros(h, w);
    let mut sparse = DMatrix::zeros(h, w);
    let mut dual = DMatrix::zeros(h, w);
    let mut delta = 0.0;
    let mut residual = f64::INFINITY;

    for _ in 0..cfg.inner_max_iters {
        let lin = &data + &jac * delta;
        low_rank = svt(&(&lin - &sparse + &dual / mu), 1.0 / mu);
        sparse = soft_threshold(&(&lin - &low_rank + &dual / mu), lambda / mu);
        if jac_sq > 0.0 {
            let target = &low_rank + &sparse - &data - &dual / mu;
            delta = jac.dot(&target) / jac_sq;
        }
        let r = &data + &jac * delta - &low_rank - &sparse;
        residual = r.norm();
        dual += &r * mu;
        mu = (mu * cfg.mu_growth).min(mu_max);
        if !residual.is_finite() || !delta.is_finite() {
            return Err(Error::Divergence { outer });
        }
        if residual < cfg.inner_tol {
            break;
        }
    }
    let objective = nuclear_norm(&low_rank) + lambda * l1_norm(&sparse);
    if !objective.is_finite() {
        return Err(Error::Divergence { outer });
    }
    Ok(LinearizedSolution {
        low_rank,
        sparse,
        delta_theta: delta,
        objective,
        residual,
    })
}

pub fn tilt_solve(patch: &Patch, init: &RotationParam, cfg: &TiltConfig) -> Result<TiltResult> {
    cfg.validate()?;
    if patch.data().iter().any(|v| !v.is_finite()) || !init.theta.is_finite() {
        return Err(Error::Divergence { outer: 0 });
    }
    let lambda = cfg.lambda_for(patch.height(), patch.width());
    let mut theta = init.theta;
    let mut increments = Vec::new();
    let mut iterates = Vec::new();
    let mut sol = solve_linearized(patch, theta, lambda, cfg, 0)?;
    let mut trace = vec![sol.objective];
    if cfg.keep_iterates {
        iterates.push((sol.low_rank.clone(), sol.sparse.clone()));
    }
    let mut converged = false;

    for outer in 1..=cfg.outer_max_iters {
        if sol.delta_theta.abs() < cfg.outer_tol {
            converged = true;
            break;
        }
        if outer == cfg.outer_max_iters {
            break;
        }
        let prev = sol.objective;
        let mut step = sol.delta_theta;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = solve_linearized(patch, theta + step, lambda, cfg, outer)?;
            if cand.objective <= prev {
                accepted = Some((step, cand));
                break;
            }
            step *= 0.5;
        }
        let Some((step, cand)) = accepted else {
            // no descent along the linearized direction: current angle is a local minimum
            converged = true;
            sol.delta_theta = 0.0;
            break;
        };
        theta += step;
        increments.push(step);
        sol = cand;
        trace.push(sol.objective);
        if cfg.keep_iterates {
            iterates.push((sol.low_rank.clone(), sol.sparse.clone()));
        }
    }
    if converged && sol.delta_theta != 0.0 {
        // the final sub-tolerance increment is part of the solution (τ + Δτ)
        theta += sol.delta_theta;
        increments.push(sol.delta_theta);
    }
    Ok(TiltResult {
        low_rank: sol.low_rank,
        sparse: sol.sparse,
        theta_total: theta,
        init_theta: init.theta,
        increments,
        objective_trace: trace,
        final_residual: sol.residual,
        converged,
        lambda,
        iterates,
    })
}

/// Total signed rotation `θ_init + Σ Δθ`, read back through the composed
/// rotation matrices and reduced into `[0, π)`.
pub fn extract_angle(result: &TiltResult) -> f64 {
    let total = result
        .increments
        .iter()
        .fold(RotationParam::new(result.init_theta), |acc, &d| {
            acc.compose(&RotationParam::new(d))
        });
    normalize_axis_angle(total.theta)
}
