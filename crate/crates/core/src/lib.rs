//! Crack width measurement on binary pavement masks.
//!
//! Given a segmented crack mask and a check point on the crack, the width is
//! counted perpendicular to the crack's main propagation axis. The axis comes
//! from a two-stage rejection chain:
//!
//! 1. **Fast path.** Boundary pixels of a square patch around the point are
//!    mean-centered and the leading eigenvector of their 2×2 scatter matrix
//!    gives the axis ([`pca`]). A RANSAC line through one crack edge
//!    ([`ransac`]) must agree with it within `γ`.
//! 2. **Robust path.** Patches that fail the gate are rotated until they are
//!    as low-rank as possible, solving a linearized nuclear-norm plus `ℓ₁`
//!    decomposition with an augmented-Lagrangian loop ([`tilt`]).
//!
//! The patch is then rotated so the axis is horizontal and the vertical crack
//! run through the point is the width ([`width`]).
//!
//! ```no_run
//! use crackwidth::{load_mask, measure, CascadeConfig, CheckPoint};
//!
//! let mask = load_mask("mask.png")?;
//! let m = measure(&mask, CheckPoint::new(120, 48), &CascadeConfig::default())?;
//! println!("{} px via {:?}", m.width_px, m.method);
//! # Ok::<(), crackwidth::Error>(())
//! ```
//!
//! Runnable walkthroughs for each stage live in the crate's `examples/`
//! directory; the `crackwidth` binary wraps the same API for batch use.

pub mod boundary;
pub mod cascade;
pub mod cli;
pub mod error;
pub mod eval;
pub mod mask;
pub mod overlay;
pub mod pca;
pub mod ransac;
pub mod synth;
pub mod tilt;
pub mod width;

pub use boundary::{center_points, extract_boundary, CenteredMatrix, PointSet};
pub use cascade::{
    is_low_complexity, measure, measure_batch, CascadeConfig, GateMode, Measurement, Method,
};
pub use error::{Error, Result};
pub use eval::{evaluate, AnnotatedMask, Annotation, EvalReport};
pub use mask::{extract_patch, load_mask, rotate_patch, save_mask, BinaryMask, CheckPoint, Patch};
pub use overlay::render_overlay;
pub use pca::{angle_from_slope, pca_slope, OrientationEstimate, Slope};
pub use ransac::{point_line_distance, ransac_fit, LineModel, RansacParams};
pub use synth::{synth_crack, ShapeKind, SyntheticCrack, SyntheticSpec};
pub use tilt::{
    extract_angle, pre_rotation_search, rotation_jacobian, soft_threshold, svt, tilt_solve,
    RotationParam, TiltConfig, TiltResult,
};
pub use width::{mae, measure_width_at, mpa_cost, mse, sbm_width, WidthSample};
