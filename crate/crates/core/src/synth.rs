//! Synthetic crack masks with analytic ground-truth widths.
//!
//! Every shape is a union of straight bands. A band is the set of pixels
//! whose signed distance `d` from a centerline satisfies
//! `-w/2 - j₋(s) <= d < w/2 + j₊(s)`, where `s` is the position along the
//! centerline and `j₋`, `j₊` are piecewise-constant boundary jitter. Jitter
//! moves at most one side of a band at any position, so the local width
//! never departs from `w` by more than the jitter amplitude.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, CheckPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Strip,
    Zigzag,
    Cross,
    AlligatorMesh,
}

impl std::str::FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strip" => Ok(Self::Strip),
            "zigzag" => Ok(Self::Zigzag),
            "cross" => Ok(Self::Cross),
            "alligator-mesh" | "mesh" => Ok(Self::AlligatorMesh),
            other => Err(format!("unknown shape kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: ShapeKind,
    pub width_px: f64,
    pub angle_deg: f64,
    pub jitter_px: f64,
    pub canvas: (usize, usize),
    pub seed: u64,
    /// Second-arm width for crosses and the second line family of meshes.
    pub width2_px: Option<f64>,
    /// Angle between the two arms of a cross or the two mesh families.
    pub cross_angle_deg: f64,
    /// Line spacing of a mesh.
    pub spacing_px: f64,
    pub n_points: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            kind: ShapeKind::Strip,
            width_px: 5.0,
            angle_deg: 0.0,
            jitter_px: 0.0,
            canvas: (160, 160),
            seed: 0,
            width2_px: None,
            cross_angle_deg: 90.0,
            spacing_px: 56.0,
            n_points: 13,
        }
    }
}

impl SyntheticSpec {
    pub fn strip(width_px: f64, angle_deg: f64) -> Self {
        Self {
            width_px,
            angle_deg,
            ..Self::default()
        }
    }
}

/// A generated check point with its ground truth and provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPoint {
    pub check_point: CheckPoint,
    pub gt_width_px: f64,
    /// Width including boundary jitter at the point's position along the band.
    pub local_width_px: f64,
    /// Index of the band the point was sampled from.
    pub arm: usize,
    /// Distance along the band to the nearest junction with another band, if any.
    pub junction_distance: Option<f64>,
    /// Direction of the generating band, radians in `[0, π)`.
    pub axis_angle: f64,
}

#[derive(Clone, Debug)]
pub struct SyntheticCrack {
    pub mask: BinaryMask,
    pub points: Vec<SyntheticPoint>,
}

impl SyntheticCrack {
    pub fn check_points(&self) -> Vec<CheckPoint> {
        self.points.iter().map(|p| p.check_point).collect()
    }

    pub fn ground_truth(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gt_width_px).collect()
    }
}

const JITTER_SEGMENT: f64 = 4.0;

#[derive(Clone, Debug)]
struct Band {
    origin: (f64, f64),
    dir: (f64, f64),
    half: f64,
    width: f64,
    /// Valid centerline positions.
    s_range: (f64, f64),
    /// Per-segment `(positive side?, offset)`, indexed from `jitter_start`.
    jitter: Vec<(bool, f64)>,
    jitter_start: f64,
}

impl Band {
    fn new(origin: (f64, f64), angle: f64, width: f64, s_range: (f64, f64)) -> Self {
        Self {
            origin,
            dir: (angle.cos(), angle.sin()),
            half: width / 2.0,
            width,
            s_range,
            jitter: Vec::new(),
            jitter_start: 0.0,
        }
    }

    fn angle(&self) -> f64 {
        crate::pca::normalize_axis_angle(self.dir.1.atan2(self.dir.0))
    }

    fn with_jitter(mut self, amplitude: f64, reach: f64, rng: &mut ChaCha8Rng) -> Self {
        if amplitude <= 0.0 {
            return self;
        }
        let lo = self.s_range.0.max(-reach);
        let hi = self.s_range.1.min(reach);
        let n = ((hi - lo) / JITTER_SEGMENT).ceil() as usize + 1;
        self.jitter_start = lo;
        self.jitter = (0..n)
            .map(|_| {
                let side = rng.random_bool(0.5);
                let offset = match rng.random_range(0..3) {
                    0 => -amplitude,
                    1 => 0.0,
                    _ => amplitude,
                };
                (side, offset)
            })
            .collect();
        self
    }

    /// `(s, d)`: position along the centerline and signed distance from it.
    fn local(&self, p: (f64, f64)) -> (f64, f64) {
        let (vx, vy) = (p.0 - self.origin.0, p.1 - self.origin.1);
        (
            vx * self.dir.0 + vy * self.dir.1,
            -vx * self.dir.1 + vy * self.dir.0,
        )
    }

    fn point_at(&self, s: f64) -> (f64, f64) {
        (
            self.origin.0 + s * self.dir.0,
            self.origin.1 + s * self.dir.1,
        )
    }

    fn offsets(&self, s: f64) -> (f64, f64) {
        if self.jitter.is_empty() {
            return (0.0, 0.0);
        }
        let idx = ((s - self.jitter_start) / JITTER_SEGMENT).floor();
        let idx = (idx.max(0.0) as usize).min(self.jitter.len() - 1);
        match self.jitter[idx] {
            (true, off) => (0.0, off),
            (false, off) => (off, 0.0),
        }
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        let (s, d) = self.local(p);
        if s < self.s_range.0 || s > self.s_range.1 {
            return false;
        }
        let (neg, pos) = self.offsets(s);
        // half-open so that a band of integer width covers that many pixels
        d >= -self.half - neg && d < self.half + pos
    }

    /// Whether `p` is within `margin` of this band's nominal region.
    fn near(&self, p: (f64, f64), margin: f64) -> bool {
        let (s, d) = self.local(p);
        s >= self.s_range.0 - margin
            && s <= self.s_range.1 + margin
            && d.abs() <= self.half + margin
    }
}

/// Joints of a polyline get a disk so consecutive bands meet without notches.
#[derive(Clone, Debug)]
struct Disk {
    center: (f64, f64),
    radius: f64,
}

struct Geometry {
    bands: Vec<Band>,
    disks: Vec<Disk>,
    /// Positions along each band where another band crosses it.
    junctions: Vec<Vec<f64>>,
}

fn line_intersection(a: &Band, b: &Band) -> Option<(f64, f64)> {
    let det = a.dir.0 * b.dir.1 - a.dir.1 * b.dir.0;
    if det.abs() < 1e-9 {
        return None;
    }
    let (wx, wy) = (b.origin.0 - a.origin.0, b.origin.1 - a.origin.1);
    let sa = (wx * b.dir.1 - wy * b.dir.0) / det;
    let sb = (wx * a.dir.1 - wy * a.dir.0) / det;
    let inside = |band: &Band, s: f64| s >= band.s_range.0 && s <= band.s_range.1;
    (inside(a, sa) && inside(b, sb)).then_some((sa, sb))
}

fn build_geometry(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Geometry {
    let (w, h) = (spec.canvas.0 as f64, spec.canvas.1 as f64);
    let center = ((spec.canvas.0 / 2) as f64, (spec.canvas.1 / 2) as f64);
    let reach = w.hypot(h);
    let full = (-reach, reach);
    let angle = spec.angle_deg.to_radians();
    let second = (spec.angle_deg + spec.cross_angle_deg).to_radians();
    let width2 = spec.width2_px.unwrap_or(spec.width_px);
    let jitter = spec.jitter_px;
    let mut disks = Vec::new();
    let bands: Vec<Band> = match spec.kind {
        ShapeKind::Strip => vec![Band::new(center, angle, spec.width_px, full)],
        ShapeKind::Cross => vec![
            Band::new(center, angle, spec.width_px, full),
            Band::new(center, second, width2, full),
        ],
        ShapeKind::Zigzag => {
            // legs alternate ±30° about the main direction
            let leg = 40.0;
            let swing = 30f64.to_radians();
            let mut p = (
                center.0 - reach * angle.cos(),
                center.1 - reach * angle.sin(),
            );
            let mut out = Vec::new();
            let mut k = 0;
            while out.len() < 200 {
                let a = angle + if k % 2 == 0 { swing } else { -swing };
                let band = Band::new(p, a, spec.width_px, (0.0, leg));
                let end = band.point_at(leg);
                disks.push(Disk {
                    center: end,
                    radius: spec.width_px / 2.0,
                });
                out.push(band);
                p = end;
                k += 1;
                let (dx, dy) = (p.0 - center.0, p.1 - center.1);
                if dx * angle.cos() + dy * angle.sin() > reach {
                    break;
                }
            }
            out
        }
        ShapeKind::AlligatorMesh => {
            let mut out = Vec::new();
            let spacing = spec.spacing_px;
            let n = (reach / spacing).ceil() as i64;
            for (base, width) in [(angle, spec.width_px), (second, width2)] {
                let normal = (-base.sin(), base.cos());
                let phase = rng.random_range(-0.25..0.25) * spacing;
                for k in -n..=n {
                    let off = k as f64 * spacing + phase + rng.random_range(-0.15..0.15) * spacing;
                    let tilt = rng.random_range(-8.0f64..8.0).to_radians();
                    let origin = (center.0 + off * normal.0, center.1 + off * normal.1);
                    out.push(Band::new(origin, base + tilt, width, full));
                }
            }
            out
        }
    };
    let bands: Vec<Band> = bands
        .into_iter()
        .map(|b| b.with_jitter(jitter, reach, rng))
        .collect();
    let mut junctions = vec![Vec::new(); bands.len()];
    for i in 0..bands.len() {
        for j in i + 1..bands.len() {
            if let Some((si, sj)) = line_intersection(&bands[i], &bands[j]) {
                junctions[i].push(si);
                junctions[j].push(sj);
            }
        }
    }
    Geometry {
        bands,
        disks,
        junctions,
    }
}

fn rasterize(geo: &Geometry, canvas: (usize, usize)) -> Result<BinaryMask> {
    BinaryMask::from_fn(canvas.0, canvas.1, |x, y| {
        let p = (x as f64, y as f64);
        geo.bands.iter().any(|b| b.contains(p))
            || geo
                .disks
                .iter()
                .any(|d| (p.0 - d.center.0).hypot(p.1 - d.center.1) <= d.radius)
    })
}

/// Fraction of check points drawn near band junctions when junctions exist.
const JUNCTION_SHARE: f64 = 0.7;
/// Farthest junction distance for junction-zone samples.
const JUNCTION_REACH: f64 = 24.0;
const MAX_ATTEMPTS: usize = 20_000;

/// Rasterizes the shape and emits `spec.n_points` check points on it.
pub fn synth_crack(spec: &SyntheticSpec) -> Result<SyntheticCrack> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let geo = build_geometry(spec, &mut rng);
    let mask = rasterize(&geo, spec.canvas)?;
    let (cw, ch) = (spec.canvas.0 as f64, spec.canvas.1 as f64);
    let max_width = spec.width_px.max(spec.width2_px.unwrap_or(0.0));
    let margin = max_width + spec.jitter_px + 4.0;
    let has_junctions = geo.junctions.iter().any(|j| !j.is_empty());

    let mut points: Vec<SyntheticPoint> = Vec::with_capacity(spec.n_points);
    let mut attempts = 0;
    while points.len() < spec.n_points {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::ShapeDoesNotFit {
                width: spec.canvas.0,
                height: spec.canvas.1,
            });
        }
        let arm = rng.random_range(0..geo.bands.len());
        let band = &geo.bands[arm];
        let near_junction =
            has_junctions && !geo.junctions[arm].is_empty() && rng.random_bool(JUNCTION_SHARE);
        let s = if near_junction {
            let js = &geo.junctions[arm];
            let j = js[rng.random_range(0..js.len())];
            let d = rng.random_range(0.0..JUNCTION_REACH);
            j + if rng.random_bool(0.5) { d } else { -d }
        } else {
            let reach = cw.hypot(ch);
            rng.random_range(band.s_range.0.max(-reach)..band.s_range.1.min(reach))
        };
        // keep clear of polyline joints
        let pad = band.width + 2.0;
        if !geo.disks.is_empty() && (s < band.s_range.0 + pad || s > band.s_range.1 - pad) {
            continue;
        }
        let c = band.point_at(s);
        if c.0 < margin || c.1 < margin || c.0 > cw - 1.0 - margin || c.1 > ch - 1.0 - margin {
            continue;
        }
        let (px, py) = (c.0.round() as usize, c.1.round() as usize);
        if !mask.get(px as i64, py as i64) || !band.contains((px as f64, py as f64)) {
            continue;
        }
        if points
            .iter()
            .any(|p| p.check_point == CheckPoint::new(px, py))
        {
            continue;
        }
        if !chord_is_clear(&geo, arm, c, spec.jitter_px) {
            continue;
        }
        let junction_distance = geo.junctions[arm]
            .iter()
            .map(|&j| (j - s).abs())
            .min_by(|a, b| a.total_cmp(b));
        let (neg, pos) = band.offsets(band.local((px as f64, py as f64)).0);
        points.push(SyntheticPoint {
            check_point: CheckPoint::new(px, py),
            gt_width_px: band.width,
            local_width_px: band.width + neg + pos,
            arm,
            junction_distance,
            axis_angle: band.angle(),
        });
    }
    Ok(SyntheticCrack { mask, points })
}

/// The perpendicular chord through `c` must only cross its own band, so the
/// analytic width is what a normal march on the raster would see.
fn chord_is_clear(geo: &Geometry, arm: usize, c: (f64, f64), jitter: f64) -> bool {
    let band = &geo.bands[arm];
    let normal = (-band.dir.1, band.dir.0);
    let reach = band.half + jitter + 2.0;
    let steps = (2.0 * reach / 0.5).ceil() as i64;
    (0..=steps).all(|k| {
        let t = -reach + k as f64 * 0.5;
        let p = (c.0 + t * normal.0, c.1 + t * normal.1);
        let others_clear = geo
            .bands
            .iter()
            .enumerate()
            .all(|(i, b)| i == arm || !b.near(p, jitter + 1.5));
        let disks_clear = geo
            .disks
            .iter()
            .all(|d| (p.0 - d.center.0).hypot(p.1 - d.center.1) > d.radius + jitter + 1.5);
        others_clear && disks_clear
    })
}

fn validate(spec: &SyntheticSpec) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
    if !spec.width_px.is_finite() || spec.width_px < 1.0 {
        return bad("width_px must be >= 1");
    }
    if let Some(w2) = spec.width2_px {
        if !w2.is_finite() || w2 < 1.0 {
            return bad("width2_px must be >= 1");
        }
    }
    if !spec.jitter_px.is_finite() || spec.jitter_px < 0.0 {
        return bad("jitter_px must be >= 0");
    }
    if !spec.angle_deg.is_finite() || !spec.cross_angle_deg.is_finite() {
        return bad("angles must be finite");
    }
    if spec.jitter_px >= spec.width_px / 2.0 && spec.jitter_px > 0.0 && spec.width_px < 3.0 {
        return bad("jitter would erase the crack");
    }
    if spec.kind == ShapeKind::AlligatorMesh
        && (spec.spacing_px.is_nan() || spec.spacing_px <= 2.0 * spec.width_px)
    {
        return bad("mesh spacing must exceed twice the width");
    }
    if spec.kind == ShapeKind::Cross && (spec.cross_angle_deg.to_radians() % PI).abs() < 1e-6 {
        return bad("cross arms must not be parallel");
    }
    let max_width = spec.width_px.max(spec.width2_px.unwrap_or(0.0));
    let needed = 2.0 * (max_width + spec.jitter_px + 4.0) + max_width;
    if (spec.canvas.0.min(spec.canvas.1) as f64) < needed {
        return Err(Error::ShapeDoesNotFit {
            width: spec.canvas.0,
            height: spec.canvas.1,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_strip_rows() {
        let crack = synth_crack(&SyntheticSpec::strip(5.0, 0.0)).unwrap();
        assert_eq!(crack.points.len(), 13);
        for p in &crack.points {
            assert_eq!(p.gt_width_px, 5.0);
            let x = p.check_point.x as i64;
            let rows: Vec<i64> = (0..160).filter(|&y| crack.mask.get(x, y)).collect();
            assert_eq!(rows, (78..=82).collect::<Vec<_>>());
        }
    }

    #[test]
    fn same_seed_same_output() {
        let spec = SyntheticSpec {
            kind: ShapeKind::AlligatorMesh,
            jitter_px: 1.0,
            seed: 9,
            canvas: (200, 200),
            ..SyntheticSpec::default()
        };
        let a = synth_crack(&spec).unwrap();
        let b = synth_crack(&spec).unwrap();
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn tiny_canvas_is_rejected() {
        let spec = SyntheticSpec {
            canvas: (20, 20),
            width_px: 9.0,
            ..SyntheticSpec::default()
        };
        assert!(matches!(
            synth_crack(&spec),
            Err(Error::ShapeDoesNotFit { .. })
        ));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!(
            "alligator-mesh".parse::<ShapeKind>().unwrap(),
            ShapeKind::AlligatorMesh
        );
        assert!("blob".parse::<ShapeKind>().is_err());
    }

    #[test]
    fn zigzag_and_cross_generate() {
        for kind in [ShapeKind::Zigzag, ShapeKind::Cross] {
            let spec = SyntheticSpec {
                kind,
                width_px: 5.0,
                width2_px: Some(9.0),
                angle_deg: 20.0,
                canvas: (200, 200),
                ..SyntheticSpec::default()
            };
            let crack = synth_crack(&spec).unwrap();
            assert_eq!(crack.points.len(), 13);
            for p in &crack.points {
                assert!(crack
                    .mask
                    .get(p.check_point.x as i64, p.check_point.y as i64));
            }
        }
    }
}
