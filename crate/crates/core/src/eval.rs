//! Corpus evaluation: width errors against ground truth and routing counts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cascade::{measure_batch, CascadeConfig, Measurement, Method};
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, CheckPoint};
use crate::synth::{synth_crack, ShapeKind, SyntheticCrack, SyntheticSpec};
use crate::width::{mae, mse};

/// One row of an annotation CSV (`x,y,gt_width_px`). The width column may be
/// absent in plain point lists.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub x: usize,
    pub y: usize,
    #[serde(default)]
    pub gt_width_px: Option<f64>,
}

impl Annotation {
    pub fn check_point(&self) -> CheckPoint {
        CheckPoint::new(self.x, self.y)
    }
}

pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    reader
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_annotations(path: impl AsRef<Path>, rows: &[Annotation]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// A mask together with annotated check points.
#[derive(Clone, Debug)]
pub struct AnnotatedMask {
    pub mask: BinaryMask,
    pub points: Vec<(CheckPoint, f64)>,
}

impl From<SyntheticCrack> for AnnotatedMask {
    fn from(crack: SyntheticCrack) -> Self {
        let points = crack
            .points
            .iter()
            .map(|p| (p.check_point, p.gt_width_px))
            .collect();
        Self {
            mask: crack.mask,
            points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub measurement: Measurement,
    pub gt_width_px: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub mask_index: usize,
    pub check_point: CheckPoint,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mae: f64,
    pub mse: f64,
    /// Successfully measured points; failures are listed in `errors`.
    pub n_points: usize,
    pub pca_count: usize,
    pub rpca_count: usize,
    pub per_point: Vec<PointResult>,
    pub errors: Vec<PointError>,
}

impl EvalReport {
    /// Fraction of measured points with `|width - gt| <= tol`.
    pub fn fraction_within(&self, tol: f64) -> f64 {
        if self.per_point.is_empty() {
            return 0.0;
        }
        let hits = self
            .per_point
            .iter()
            .filter(|p| (p.measurement.width_px as f64 - p.gt_width_px).abs() <= tol)
            .count();
        hits as f64 / self.per_point.len() as f64
    }
}

/// Measures every annotated point and aggregates MAE, MSE and routing counts.
pub fn evaluate(corpus: &[AnnotatedMask], cfg: &CascadeConfig, jobs: usize) -> Result<EvalReport> {
    if corpus.is_empty() {
        return Err(Error::Empty);
    }
    cfg.validate()?;
    let mut per_point = Vec::new();
    let mut errors = Vec::new();
    for (mask_index, item) in corpus.iter().enumerate() {
        let cps: Vec<CheckPoint> = item.points.iter().map(|p| p.0).collect();
        let results = measure_batch(&item.mask, &cps, cfg, jobs);
        for ((cp, gt), result) in item.points.iter().zip(results) {
            match result {
                Ok(measurement) => per_point.push(PointResult {
                    measurement,
                    gt_width_px: *gt,
                }),
                Err(e) => errors.push(PointError {
                    mask_index,
                    check_point: *cp,
                    error: e.to_string(),
                }),
            }
        }
    }
    let widths: Vec<f64> = per_point
        .iter()
        .map(|p| p.measurement.width_px as f64)
        .collect();
    let gts: Vec<f64> = per_point.iter().map(|p| p.gt_width_px).collect();
    let pca_count = per_point
        .iter()
        .filter(|p| p.measurement.method == Method::Pca)
        .count();
    Ok(EvalReport {
        mae: mae(&widths, &gts)?,
        mse: mse(&widths, &gts)?,
        n_points: per_point.len(),
        pca_count,
        rpca_count: per_point.len() - pca_count,
        per_point,
        errors,
    })
}

/// Straight strips over widths {3, 5, 9, 15} × angles {0°, 15°, …, 75°} ×
/// jitter {0, 1}, 13 check points each.
pub fn straight_strip_specs() -> Vec<SyntheticSpec> {
    let mut specs = Vec::new();
    let mut seed = 0;
    for width in [3.0, 5.0, 9.0, 15.0] {
        for angle in [0.0, 15.0, 30.0, 45.0, 60.0, 75.0] {
            for jitter in [0.0, 1.0] {
                specs.push(SyntheticSpec {
                    kind: ShapeKind::Strip,
                    width_px: width,
                    angle_deg: angle,
                    jitter_px: jitter,
                    canvas: (160, 160),
                    seed,
                    ..SyntheticSpec::default()
                });
                seed += 1;
            }
        }
    }
    specs
}

/// Two crosses and six meshes, 13 junction-heavy check points each.
pub fn complex_specs() -> Vec<SyntheticSpec> {
    let mut specs = vec![
        SyntheticSpec {
            kind: ShapeKind::Cross,
            width_px: 5.0,
            width2_px: Some(9.0),
            angle_deg: 20.0,
            canvas: (200, 200),
            seed: 100,
            ..SyntheticSpec::default()
        },
        SyntheticSpec {
            kind: ShapeKind::Cross,
            width_px: 7.0,
            width2_px: Some(4.0),
            angle_deg: 65.0,
            jitter_px: 1.0,
            canvas: (200, 200),
            seed: 101,
            ..SyntheticSpec::default()
        },
    ];
    for k in 0..6u64 {
        specs.push(SyntheticSpec {
            kind: ShapeKind::AlligatorMesh,
            width_px: [3.0, 5.0, 7.0][k as usize % 3],
            width2_px: Some([5.0, 4.0, 6.0][k as usize % 3]),
            angle_deg: 10.0 + 13.0 * k as f64,
            jitter_px: if k % 2 == 0 { 0.0 } else { 1.0 },
            canvas: (240, 240),
            spacing_px: 56.0,
            seed: 200 + k,
            ..SyntheticSpec::default()
        });
    }
    specs
}

pub fn build_corpus(specs: &[SyntheticSpec]) -> Result<Vec<AnnotatedMask>> {
    specs
        .iter()
        .map(|s| synth_crack(s).map(AnnotatedMask::from))
        .collect()
}
