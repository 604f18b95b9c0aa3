//! Stationary real solutions of the nonlinear Schrödinger equation
//! `μφ = -φ'' - (σ+1)νφ^(2σ+1)` on intervals and star graphs.
//!
//! The crate is organized around the energy-conservation structure of the
//! equation: every bounded oscillating solution is parametrized by the pair
//! `(μ, α)` of spectral parameter and amplitude, its period is a singular
//! integral evaluated by [`quadrature`], and solutions themselves are
//! reconstructed by inverting the quarter-period map ([`solution`]).
//!
//! On top of that sit two solvers:
//!
//! - [`interval`] traces the spectral curves `γ_n` of an interval problem,
//!   on which every solution has exactly `n - 1` interior zeros;
//! - [`star`] solves the continuity/Kirchhoff matching conditions at the
//!   central vertex of a star graph and continues solution families in `μ`,
//!   tracking the interior nodal count, which — unlike on the interval —
//!   can change along a family. [`counterexample`] constructs explicit
//!   configurations where it provably does.
//!
//! [`oracle`] is an independent verification path: direct high-order
//! integration of the ODE, used to cross-check periods, zeros, and profiles
//! produced by the quadrature/inversion machinery.
#![allow(clippy::needless_range_loop)] // makes math code less readable
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` guards NaN too

pub mod counterexample;
pub mod interval;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod solution;
pub mod star;

pub use counterexample::{StarConfig, ViolationReport};
pub use interval::CurveSample;
pub use model::{
    BoundaryCondition, EnergyLevel, IntervalProblem, ModelParams, ParamPoint, Region, Sign,
    StarGraph,
};
pub use quadrature::WavelengthResult;
pub use solution::{EdgeBranch, LineSolution};
pub use star::{LocalCurvePoint, StarPoint};

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sigma must be a positive integer, got {0}")]
    InvalidSigma(u32),

    #[error("nu must be finite and nonzero, got {0}")]
    InvalidNu(f64),

    #[error("alpha must be positive and finite, got {0}")]
    NonPositiveAlpha(f64),

    #[error("length must be positive and finite, got {0}")]
    NonPositiveLength(f64),

    #[error("a star graph needs at least 3 edges, got {0}")]
    TooFewEdges(usize),

    #[error("per-edge data has mismatched lengths: {0}")]
    MismatchedEdgeData(String),

    #[error("(mu, alpha) = ({mu}, {alpha}) lies outside the admissible parameter regions")]
    OutsideRegion { mu: f64, alpha: f64 },

    #[error(
        "wavelength diverges: mu = {mu} is within the guard band of the region boundary {boundary}"
    )]
    WavelengthDiverges { mu: f64, boundary: f64 },

    #[error("phi = {phi} is outside the admissible range [0, {alpha}]")]
    PhiOutOfRange { phi: f64, alpha: f64 },

    #[error("no spectral curve with index n = {n} exists for these boundary conditions")]
    NoSuchCurve { n: u32 },

    #[error(
        "wavelength {target} is not attainable at alpha = {alpha} within the divergence guard"
    )]
    UnattainableWavelength { target: f64, alpha: f64 },

    #[error(
        "curve jump: |mu step| = {jump} exceeds the continuity bound {bound} at alpha = {alpha}"
    )]
    ContinuityJump { alpha: f64, jump: f64, bound: f64 },

    #[error("Newton iteration failed to converge after {iters} iterations (residual {residual})")]
    NewtonStalled { iters: usize, residual: f64 },

    #[error("Jacobian is singular or ill-conditioned (condition estimate {cond:.3e})")]
    IllConditionedJacobian { cond: f64 },

    #[error("continuation stalled at mu = {mu}: {reason}")]
    ContinuationStalled { mu: f64, reason: String },

    #[error("trajectory blew up at x = {x} (|phi| = {phi})")]
    BlowUp { x: f64, phi: f64 },

    #[error("invalid star configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
