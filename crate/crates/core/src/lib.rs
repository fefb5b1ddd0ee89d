//! Numerical laboratory for the thin obstacle (Signorini) problem.
//!
//! The crate is organised around the objects that drive the analysis of the
//! problem near a free boundary point:
//!
//! - [`spharm`] — eigenfunctions and quadrature on the unit sphere of ℝ^{n+1}
//!   (n = 1, 2), with projection and synthesis of even traces.
//! - [`homog`] — homogeneous extensions `r^α c(θ)`, Weiss energies in closed
//!   form, and the special profiles `h_e` and `u₀`.
//! - [`epi`] — the trace decomposition `c = C·h_e + c₀·u₀ + φ`, the explicit
//!   competitor, and the epiperimetric inequality verifier with its
//!   I/J/K/L ledger.
//! - [`signorini`] — projected relaxation solver for the discrete thin
//!   obstacle problem on a half-grid.
//! - [`diagnostics`] — Almgren frequency, boundary-mass monotonicity,
//!   blow-ups, growth and Hölder-gradient instrumentation.
//! - [`gapscan`] — exhaustive enumeration of homogeneous 2-d solutions and
//!   the (1, 3/2) frequency-gap certificate.
//!
//! Everything is deterministic: random suites are seeded, and all floating
//! output is emitted with 17 significant digits.

pub mod diagnostics;
pub mod epi;
pub mod gapscan;
pub mod homog;
pub mod presets;
pub mod report;
pub mod signorini;
pub mod spharm;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported ambient dimension n = {0} (only n = 1 and n = 2)")]
    UnsupportedDimension(usize),
    #[error("degree cutoff K = {0} too small; the trace decomposition needs degrees 0..=2")]
    CutoffTooSmall(usize),
    #[error("trace and basis disagree: {0}")]
    DimensionMismatch(String),
    #[error("coefficient vector of length {got} exceeds the {max} basis modes")]
    LengthMismatch { got: usize, max: usize },
    #[error("direction must be a unit vector in the equatorial plane (|e| = {0})")]
    NonUnitDirection(f64),
    #[error("degenerate radial denominator α+β+n-1 = {0}")]
    DegenerateDenominator(f64),
    #[error("trace is not admissible: equator value {min} below -1e-10")]
    InadmissibleTrace { min: f64 },
    #[error("trace is not even across the equator (asymmetry {0:.3e})")]
    NotEven(f64),
    #[error("eigen-equation residual {residual:.3e} exceeds {tol:.1e}; trace is not the profile of a homogeneous solution")]
    EigenResidual { residual: f64, tol: f64 },
    #[error("shift t = {0} must be negative")]
    NonNegativeShift(f64),
    #[error("grid spacing 1/{denom} outside the supported range 1/64 ..= 1/512")]
    BadSpacing { denom: usize },
    #[error("boundary data has negative equator corner value {0:.3e}")]
    BadBoundaryData(f64),
    #[error("relaxation did not converge: residual {residual:.3e} after {sweeps} sweeps")]
    NotConverged { residual: f64, sweeps: usize },
    #[error("sphere integral degenerate: H(r) = {0:.3e}")]
    DegenerateSphere(f64),
    #[error("radius {r} below the reliable minimum {min} (= 4h)")]
    RadiusTooSmall { r: f64, min: f64 },
    #[error("need at least {need} radii, got {got}")]
    TooFewRadii { need: usize, got: usize },
    #[error("center ({0}, {1}) is not on the free boundary")]
    NotOnFreeBoundary(f64, f64),
    #[error("ball of radius {r} around ({x}, {y}) leaves the computational domain")]
    BallOutsideDomain { x: f64, y: f64, r: f64 },
    #[error("scan step {0} too coarse; endpoint cases need step <= 1e-3")]
    StepTooCoarse(f64),
    #[error("invalid scan window [{0}, {1}]")]
    BadScanWindow(f64, f64),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
