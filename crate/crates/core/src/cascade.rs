//! The PCA → RANSAC gate → robust-PCA rejection chain.
//!
//! Every check point first gets the cheap estimate: boundary pixels of the
//! patch, their principal axis (`t1`), and a RANSAC line through one crack
//! edge (`t2`). When the two agree within `γ` the crack is locally simple and
//! the PCA axis is used. Otherwise, or when RANSAC finds no consensus line,
//! the patch falls through to the low-rank rotation solver.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{center_points, extract_boundary};
use crate::error::{Error, Result};
use crate::mask::{extract_patch, BinaryMask, CheckPoint, Patch};
use crate::pca::{axis_distance, normalize_axis_angle, pca_slope, Slope};
use crate::ransac::{ransac_fit, RansacParams};
use crate::tilt::{extract_angle, pre_rotation_search, tilt_solve, TiltConfig};
use crate::width::{measure_width_at, WidthSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Circular distance between the two axis angles, modulo π.
    Angle,
    /// Raw slope difference; a vertical estimate on either side fails the gate.
    Slope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pca,
    Rpca,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Gate threshold `γ` in degrees. In slope mode the same number, taken in
    /// radians, bounds the raw slope difference.
    pub gamma_deg: f64,
    pub gate_mode: GateMode,
    pub patch_size: usize,
    pub ransac: RansacParams,
    pub tilt: TiltConfig,
    /// Skip the gate and always run the robust path (timing comparisons).
    #[serde(default)]
    pub force_rpca: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            gamma_deg: 10.0,
            gate_mode: GateMode::Angle,
            patch_size: 64,
            ransac: RansacParams::default(),
            tilt: TiltConfig::default(),
            force_rpca: false,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_deg > 0.0 && self.gamma_deg < 90.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma_deg must be in (0, 90), got {}",
                self.gamma_deg
            )));
        }
        if self.patch_size < crate::mask::MIN_PATCH_SIZE {
            return Err(Error::PatchTooSmall(self.patch_size));
        }
        self.ransac.validate()?;
        self.tilt.validate()
    }
}

/// Per-check-point result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub check_point: CheckPoint,
    pub width_px: usize,
    pub mpa_angle_deg: f64,
    pub method: Method,
    pub t1_angle_deg: f64,
    /// `None` when RANSAC found no consensus line.
    pub t2_angle_deg: Option<f64>,
    /// `None` when the gate could not be evaluated (no RANSAC line, or a vertical slope in slope mode).
    pub gate_margin_deg: Option<f64>,
    pub elapsed_pca_ms: f64,
    pub elapsed_rpca_ms: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub forced_rpca: bool,
}

impl Measurement {
    /// Copy with timing fields zeroed, for comparing outcomes across runs.
    pub fn without_timings(&self) -> Measurement {
        Measurement {
            elapsed_pca_ms: 0.0,
            elapsed_rpca_ms: 0.0,
            ..self.clone()
        }
    }

    /// Whether the method tag agrees with the recorded gate margin.
    pub fn routing_is_sound(&self, gamma_deg: f64) -> bool {
        match (self.method, self.gate_margin_deg) {
            (Method::Pca, Some(m)) => m <= gamma_deg && !self.forced_rpca,
            (Method::Pca, None) => false,
            (Method::Rpca, Some(m)) => m > gamma_deg || self.forced_rpca,
            (Method::Rpca, None) => true,
        }
    }
}

/// Gate test between the PCA axis and the RANSAC line.
pub fn is_low_complexity(t1_angle: f64, t2_angle: f64, gamma: f64) -> bool {
    axis_distance(t1_angle, t2_angle) <= gamma
}

/// Literal slope-difference gate; vertical on either side fails.
pub fn is_low_complexity_slope(t1: Slope, t2: Slope, gamma: f64) -> bool {
    match (t1, t2) {
        (Slope::Finite(a), Slope::Finite(b)) => (a - b).abs() <= gamma,
        _ => false,
    }
}

fn gate_margin_deg(mode: GateMode, t1: (f64, Slope), t2: (f64, Slope)) -> Option<f64> {
    match mode {
        GateMode::Angle => Some(axis_distance(t1.0, t2.0).to_degrees()),
        GateMode::Slope => match (t1.1, t2.1) {
            // expressed so that `margin <= gamma_deg` iff `|Δslope| <= gamma_deg.to_radians()`
            (Slope::Finite(a), Slope::Finite(b)) => Some((a - b).abs().to_degrees()),
            _ => None,
        },
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs the low-rank rotation solver and resolves its quarter-turn ambiguity.
///
/// A rotation that renders the patch low-rank does so for the perpendicular
/// axis as well. Of the two candidates, the one with the shorter
/// perpendicular run through the check point is taken.
pub fn rpca_axis(patch: &Patch, cp: CheckPoint, tilt: &TiltConfig) -> Result<(f64, WidthSample)> {
    let init = pre_rotation_search(patch, &tilt.angle_grid)?;
    let result = tilt_solve(patch, &init, tilt)?;
    let theta = extract_angle(&result);
    let other = normalize_axis_angle(theta + FRAC_PI_2);
    match (
        measure_width_at(patch, cp, theta),
        measure_width_at(patch, cp, other),
    ) {
        (Ok(a), Ok(b)) => Ok(if b.width_px < a.width_px {
            (other, b)
        } else {
            (theta, a)
        }),
        (Ok(a), Err(_)) => Ok((theta, a)),
        (Err(_), Ok(b)) => Ok((other, b)),
        (Err(e), Err(_)) => Err(e),
    }
}

pub fn measure(mask: &BinaryMask, cp: CheckPoint, cfg: &CascadeConfig) -> Result<Measurement> {
    cfg.validate()?;
    let start = Instant::now();
    let patch = extract_patch(mask, cp, cfg.patch_size)?;
    let (cx, cy) = patch.center();
    let local = CheckPoint::new(cx, cy);

    let boundary = extract_boundary(&patch)?;
    let orientation = pca_slope(&center_points(&boundary)?)?;
    let line = match ransac_fit(&boundary, &cfg.ransac) {
        Ok(line) => Some(line),
        Err(Error::NoConsensus { .. }) => None,
        Err(e) => return Err(e),
    };
    let t1 = (orientation.angle, orientation.slope);
    let margin = line.and_then(|l| gate_margin_deg(cfg.gate_mode, t1, (l.angle, l.slope)));
    let low = margin.is_some_and(|m| m <= cfg.gamma_deg);

    let mut elapsed_rpca_ms = 0.0;
    let (method, angle, sample) = if low && !cfg.force_rpca {
        let sample = measure_width_at(&patch, local, orientation.angle)?;
        (Method::Pca, orientation.angle, sample)
    } else {
        let rpca_start = Instant::now();
        let (angle, sample) = rpca_axis(&patch, local, &cfg.tilt)?;
        elapsed_rpca_ms = ms(rpca_start);
        (Method::Rpca, angle, sample)
    };
    let elapsed_pca_ms = ms(start) - elapsed_rpca_ms;

    Ok(Measurement {
        check_point: cp,
        width_px: sample.width_px,
        mpa_angle_deg: angle.to_degrees(),
        method,
        t1_angle_deg: orientation.angle.to_degrees(),
        t2_angle_deg: line.map(|l| l.angle.to_degrees()),
        gate_margin_deg: margin,
        elapsed_pca_ms,
        elapsed_rpca_ms,
        forced_rpca: cfg.force_rpca,
    })
}

/// Measures every check point; errors are kept per point, order is preserved.
///
/// `jobs > 1` spreads the points over a dedicated thread pool. Each point is
/// independent, so the outcome matches the serial run exactly.
pub fn measure_batch(
    mask: &BinaryMask,
    cps: &[CheckPoint],
    cfg: &CascadeConfig,
    jobs: usize,
) -> Vec<Result<Measurement>> {
    if jobs <= 1 || cps.len() <= 1 {
        return cps.iter().map(|&cp| measure(mask, cp, cfg)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| cps.par_iter().map(|&cp| measure(mask, cp, cfg)).collect()),
        Err(_) => cps.iter().map(|&cp| measure(mask, cp, cfg)).collect(),
    }
}
