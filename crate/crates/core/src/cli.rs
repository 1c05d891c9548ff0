//! Command-line front end: argument types, validation and the subcommand runners.
//!
//! Exit codes: 0 on success, 1 when at least one check point failed (the
//! failure is reported in the output), 2 on an invalid invocation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use image::GrayImage;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cascade::{measure_batch, CascadeConfig, GateMode, Measurement, Method};
use crate::error::{Error, Result};
use crate::eval::{
    build_corpus, complex_specs, evaluate, read_annotations, straight_strip_specs,
    write_annotations, AnnotatedMask, Annotation, EvalReport,
};
use crate::mask::{extract_patch, load_mask, save_mask, write_gray, BinaryMask, CheckPoint};
use crate::overlay::render_overlay;
use crate::ransac::RansacParams;
use crate::synth::{synth_crack, ShapeKind, SyntheticSpec};
use crate::tilt::{pre_rotation_search, tilt_solve, warp, TiltConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_POINT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "crackwidth",
    version,
    about = "Crack width measurement on binary masks"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure the width at one check point; prints one JSON object.
    Measure(MeasureArgs),
    /// Measure many check points; prints one JSON line per point.
    Batch(BatchArgs),
    /// Score the pipeline against annotated widths; prints an evaluation report.
    Eval(EvalArgs),
    /// Write a synthetic crack mask and its annotation CSV.
    Synth(SynthArgs),
    /// Render measurements on top of the mask as a PNG.
    Overlay(OverlayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Side of the square patch around each check point, pixels.
    #[arg(long, default_value_t = 64)]
    pub patch_size: usize,
    /// Gate threshold between the PCA and RANSAC estimates, degrees.
    #[arg(long, default_value_t = 10.0)]
    pub gamma_deg: f64,
    #[arg(long, value_enum, default_value_t = GateModeArg::Angle)]
    pub gate_mode: GateModeArg,
    /// Sparse weight of the robust solver [default: 1/sqrt(patch size)].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Pre-rotation candidates in degrees: `start:step:end` or a comma list.
    #[arg(long, default_value = "0:5:90")]
    pub angle_grid: String,
    #[arg(long, default_value_t = 50)]
    pub max_outer: usize,
    /// Inner-loop residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// RANSAC seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Always run the robust path.
    #[arg(long)]
    pub force_rpca: bool,
    /// Include wall-clock timings (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Also report widths in millimeters.
    #[arg(long)]
    pub scale_mm_per_px: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateModeArg {
    Angle,
    Slope,
}

impl From<GateModeArg> for GateMode {
    fn from(g: GateModeArg) -> Self {
        match g {
            GateModeArg::Angle => GateMode::Angle,
            GateModeArg::Slope => GateMode::Slope,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub mask: PathBuf,
    /// Check point as `x,y`.
    #[arg(long, value_parser = parse_point)]
    pub point: CheckPoint,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for per-iteration images of the robust solver.
    #[arg(long)]
    pub debug_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PointsArgs {
    #[arg(long)]
    pub mask: PathBuf,
    /// Check point as `x,y`; repeatable.
    #[arg(long = "point", value_parser = parse_point)]
    pub point: Vec<CheckPoint>,
    /// CSV with `x,y` columns.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub input: PointsArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub debug_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Corpus {
    Straight,
    Complex,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Built-in synthetic corpus.
    #[arg(long, value_enum, conflicts_with_all = ["mask", "points"])]
    pub corpus: Option<Corpus>,
    #[arg(long, requires = "points")]
    pub mask: Option<PathBuf>,
    /// CSV with `x,y,gt_width_px` columns.
    #[arg(long, requires = "mask")]
    pub points: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "strip")]
    pub kind: ShapeKind,
    #[arg(long, default_value_t = 5.0)]
    pub width: f64,
    #[arg(long, default_value_t = 0.0)]
    pub angle: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Canvas as `WxH`.
    #[arg(long, default_value = "160x160", value_parser = parse_canvas)]
    pub canvas: (usize, usize),
    /// Width of the second arm (cross) or second line family (mesh).
    #[arg(long)]
    pub width2: Option<f64>,
    #[arg(long, default_value_t = 90.0)]
    pub cross_angle: f64,
    #[arg(long, default_value_t = 56.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 13)]
    pub n_points: usize,
    /// Mask output path (PNG, or PGM by extension).
    #[arg(long)]
    pub out: PathBuf,
    /// Annotation CSV path [default: mask path with a .csv extension].
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OverlayArgs {
    #[command(flatten)]
    pub input: PointsArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// PNG output path.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_point(s: &str) -> std::result::Result<CheckPoint, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let coord = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad coordinate {v:?}: {e}"))
    };
    Ok(CheckPoint::new(coord(x)?, coord(y)?))
}

fn parse_canvas(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let dim = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad canvas size {v:?}: {e}"))
    };
    Ok((dim(w)?, dim(h)?))
}

/// Parses `start:step:end` (inclusive) or a comma-separated list of degrees.
pub fn parse_angle_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("bad angle {v:?}"))
    };
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, step, end] = parts[..] else {
            return Err(format!("expected start:step:end, got {s:?}"));
        };
        let (start, step, end) = (num(start)?, num(step)?, num(end)?);
        if step <= 0.0 || end < start {
            return Err(format!("empty angle range {s:?}"));
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(format!("angle range {s:?} has too many entries"));
        }
        (0..=n).map(|k| start + k as f64 * step).collect()
    } else {
        s.split(',')
            .map(num)
            .collect::<std::result::Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err("angle grid is empty".into());
    }
    Ok(grid)
}

impl PipelineArgs {
    /// Builds and validates the cascade configuration.
    pub fn cascade_config(&self) -> std::result::Result<CascadeConfig, String> {
        if self.jobs == 0 {
            return Err("--jobs must be >= 1".into());
        }
        if let Some(s) = self.scale_mm_per_px {
            if !(s > 0.0 && s.is_finite()) {
                return Err("--scale-mm-per-px must be > 0".into());
            }
        }
        let cfg = CascadeConfig {
            gamma_deg: self.gamma_deg,
            gate_mode: self.gate_mode.into(),
            patch_size: self.patch_size,
            ransac: RansacParams {
                seed: self.seed,
                ..RansacParams::default()
            },
            tilt: TiltConfig {
                lambda: self.lambda,
                inner_tol: self.tol,
                outer_max_iters: self.max_outer,
                angle_grid: parse_angle_grid(&self.angle_grid)?,
                ..TiltConfig::default()
            },
            force_rpca: self.force_rpca,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn render(&self, m: &Measurement) -> Value {
        let mut v = serde_json::to_value(m).expect("measurement serializes");
        let obj = v.as_object_mut().expect("measurement is an object");
        if !self.timings {
            obj.remove("elapsed_pca_ms");
            obj.remove("elapsed_rpca_ms");
        }
        if let Some(scale) = self.scale_mm_per_px {
            obj.insert("width_mm".into(), json!(m.width_px as f64 * scale));
        }
        v
    }
}

fn error_json(cp: CheckPoint, e: &Error) -> Value {
    json!({ "check_point": cp, "error": e.to_string() })
}

fn usage_error(msg: impl std::fmt::Display) -> i32 {
    let err = CliConfig::command().error(ErrorKind::ValueValidation, msg);
    eprint!("{}", err.render());
    EXIT_USAGE
}

fn runtime_error(e: impl std::fmt::Display) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json_line(out: &mut dyn Write, v: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer(&mut *out, v)?;
    out.write_all(b"\n")
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match CliConfig::try_parse_from(args) {
        Ok(cfg) => run(cfg),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn run(cfg: CliConfig) -> i32 {
    let code = match cfg.command {
        Command::Measure(a) => run_measure(&a),
        Command::Batch(a) => run_batch(&a),
        Command::Eval(a) => run_eval(&a),
        Command::Synth(a) => run_synth(&a),
        Command::Overlay(a) => run_overlay(&a),
    };
    match code {
        Ok(c) => c,
        Err(e) => runtime_error(e),
    }
}

fn load_points(input: &PointsArgs) -> std::result::Result<Vec<CheckPoint>, i32> {
    let mut cps = input.point.clone();
    if let Some(path) = &input.points {
        let rows = read_annotations(path).map_err(runtime_error)?;
        cps.extend(rows.iter().map(Annotation::check_point));
    }
    if cps.is_empty() {
        return Err(usage_error(
            "no check points given (use --point or --points)",
        ));
    }
    Ok(cps)
}

fn run_measure(a: &MeasureArgs) -> io::Result<i32> {
    let cfg = match a.pipeline.cascade_config() {
        Ok(c) => c,
        Err(msg) => return Ok(usage_error(msg)),
    };
    let mask = match load_mask(&a.mask) {
        Ok(m) => m,
        Err(e) => return Ok(runtime_error(e)),
    };
    let result = measure_batch(&mask, &[a.point], &cfg, 1).remove(0);
    let mut out = open_output(a.out.as_deref())?;
    let code = match &result {
        Ok(m) => {
            write_json_line(&mut *out, &a.pipeline.render(m))?;
            EXIT_OK
        }
        Err(e) => {
            write_json_line(&mut *out, &error_json(a.point, e))?;
            EXIT_POINT_FAILURE
        }
    };
    out.flush()?;
    if let (Some(dir), Ok(m)) = (&a.debug_dump, &result) {
        dump_iterations(&mask, std::slice::from_ref(m), &cfg, dir)?;
    }
    Ok(code)
}

fn run_batch(a: &BatchArgs) -> io::Result<i32> {
    let cfg = match a.pipeline.cascade_config() {
        Ok(c) => c,
        Err(msg) => return Ok(usage_error(msg)),
    };
    let cps = match load_points(&a.input) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let mask = match load_mask(&a.input.mask) {
        Ok(m) => m,
        Err(e) => return Ok(runtime_error(e)),
    };
    let results = measure_batch(&mask, &cps, &cfg, a.pipeline.jobs);
    let mut out = open_output(a.out.as_deref())?;
    let mut code = EXIT_OK;
    for (cp, r) in cps.iter().zip(&results) {
        match r {
            Ok(m) => write_json_line(&mut *out, &a.pipeline.render(m))?,
            Err(e) => {
                write_json_line(&mut *out, &error_json(*cp, e))?;
                code = EXIT_POINT_FAILURE;
            }
        }
    }
    out.flush()?;
    if let Some(dir) = &a.debug_dump {
        let ok: Vec<Measurement> = results.into_iter().filter_map(|r| r.ok()).collect();
        dump_iterations(&mask, &ok, &cfg, dir)?;
    }
    Ok(code)
}

fn run_eval(a: &EvalArgs) -> io::Result<i32> {
    let cfg = match a.pipeline.cascade_config() {
        Ok(c) => c,
        Err(msg) => return Ok(usage_error(msg)),
    };
    let corpus = match (a.corpus, &a.mask, &a.points) {
        (Some(Corpus::Straight), _, _) => build_corpus(&straight_strip_specs()),
        (Some(Corpus::Complex), _, _) => build_corpus(&complex_specs()),
        (None, Some(mask), Some(points)) => {
            let rows = match read_annotations(points) {
                Ok(r) => r,
                Err(e) => return Ok(runtime_error(e)),
            };
            if rows.iter().any(|r| r.gt_width_px.is_none()) {
                return Ok(usage_error(
                    "every annotation row needs gt_width_px for eval",
                ));
            }
            load_mask(mask).map(|mask| {
                vec![AnnotatedMask {
                    mask,
                    points: rows
                        .iter()
                        .map(|r| (r.check_point(), r.gt_width_px.unwrap_or_default()))
                        .collect(),
                }]
            })
        }
        _ => return Ok(usage_error("eval needs --corpus, or --mask with --points")),
    };
    let report = match corpus.and_then(|c| evaluate(&c, &cfg, a.pipeline.jobs)) {
        Ok(r) => r,
        Err(e) => return Ok(runtime_error(e)),
    };
    let mut out = open_output(a.out.as_deref())?;
    write_json_line(&mut *out, &render_report(&report, &a.pipeline))?;
    out.flush()?;
    Ok(if report.errors.is_empty() {
        EXIT_OK
    } else {
        EXIT_POINT_FAILURE
    })
}

fn render_report(report: &EvalReport, pipeline: &PipelineArgs) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    let per_point: Vec<Value> = report
        .per_point
        .iter()
        .map(|p| json!({ "measurement": pipeline.render(&p.measurement), "gt_width_px": p.gt_width_px }))
        .collect();
    v["per_point"] = Value::Array(per_point);
    v
}

fn run_synth(a: &SynthArgs) -> io::Result<i32> {
    let spec = SyntheticSpec {
        kind: a.kind,
        width_px: a.width,
        angle_deg: a.angle,
        jitter_px: a.jitter,
        canvas: a.canvas,
        seed: a.seed,
        width2_px: a.width2,
        cross_angle_deg: a.cross_angle,
        spacing_px: a.spacing,
        n_points: a.n_points,
    };
    let crack = match synth_crack(&spec) {
        Ok(c) => c,
        Err(e) => return Ok(usage_error(e)),
    };
    let csv_path = a
        .annotations
        .clone()
        .unwrap_or_else(|| a.out.with_extension("csv"));
    let rows: Vec<Annotation> = crack
        .points
        .iter()
        .map(|p| Annotation {
            x: p.check_point.x,
            y: p.check_point.y,
            gt_width_px: Some(p.gt_width_px),
        })
        .collect();
    if let Err(e) = save_mask(&crack.mask, &a.out).and_then(|_| write_annotations(&csv_path, &rows))
    {
        return Ok(runtime_error(e));
    }
    let mut out = open_output(None)?;
    write_json_line(
        &mut *out,
        &json!({ "mask": a.out, "annotations": csv_path, "n_points": rows.len() }),
    )?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn run_overlay(a: &OverlayArgs) -> io::Result<i32> {
    let cfg = match a.pipeline.cascade_config() {
        Ok(c) => c,
        Err(msg) => return Ok(usage_error(msg)),
    };
    let cps = match load_points(&a.input) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let mask = match load_mask(&a.input.mask) {
        Ok(m) => m,
        Err(e) => return Ok(runtime_error(e)),
    };
    let results = measure_batch(&mask, &cps, &cfg, a.pipeline.jobs);
    let mut out = open_output(None)?;
    let mut ok = Vec::new();
    let mut code = EXIT_OK;
    for (cp, r) in cps.iter().zip(results) {
        match r {
            Ok(m) => ok.push(m),
            Err(e) => {
                write_json_line(&mut *out, &error_json(*cp, &e))?;
                code = EXIT_POINT_FAILURE;
            }
        }
    }
    out.flush()?;
    if let Err(e) = render_overlay(&mask, &ok, &a.out) {
        return Ok(runtime_error(e));
    }
    Ok(code)
}

/// Min-max scales a matrix into an 8-bit image.
fn matrix_image(m: &DMatrix<f64>) -> GrayImage {
    let (lo, hi) = (m.min(), m.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    GrayImage::from_fn(m.ncols() as u32, m.nrows() as u32, |x, y| {
        let v = (m[(y as usize, x as usize)] - lo) / span;
        image::Luma([(v * 255.0).round() as u8])
    })
}

/// Re-runs the robust solver for every robust-path measurement and writes the
/// warped patch and the sparse part after each outer iteration.
fn dump_iterations(
    mask: &BinaryMask,
    measurements: &[Measurement],
    cfg: &CascadeConfig,
    dir: &Path,
) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let tilt = TiltConfig {
        keep_iterates: true,
        ..cfg.tilt.clone()
    };
    for m in measurements.iter().filter(|m| m.method == Method::Rpca) {
        let cp = m.check_point;
        let dumped: Result<()> = (|| {
            let patch = extract_patch(mask, cp, cfg.patch_size)?;
            let init = pre_rotation_search(&patch, &tilt.angle_grid)?;
            let result = tilt_solve(&patch, &init, &tilt)?;
            let mut theta = result.init_theta;
            for (k, (_, sparse)) in result.iterates.iter().enumerate() {
                if k > 0 {
                    theta += result.increments[k - 1];
                }
                let stem = format!("{}_{}_iter{k:02}", cp.x, cp.y);
                write_gray(
                    &matrix_image(&warp(&patch, theta)),
                    &dir.join(format!("{stem}_d.png")),
                )?;
                write_gray(&matrix_image(sparse), &dir.join(format!("{stem}_e.png")))?;
            }
            Ok(())
        })();
        if let Err(e) = dumped {
            eprintln!("debug dump for ({},{}) failed: {e}", cp.x, cp.y);
        }
    }
    Ok(())
}
