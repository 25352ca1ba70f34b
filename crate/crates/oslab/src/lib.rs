//! Numerical laboratory for the instability of viscous shear layers on the
//! half-line `y >= 0`.
//!
//! The crate provides, bottom up:
//!
//! * [`grid`] — mapped Chebyshev collocation on `[0, infinity)` (spectral
//!   differentiation, quadrature, interpolation);
//! * [`profile`] — analytic base flows `U(y)` with `U(0) = 0`, their
//!   derivatives, analyticity coefficients and heat evolution;
//! * [`blnorm`] — weighted sup-norms, boundary-layer norms and two-parameter
//!   generator functions of wavenumber fields;
//! * [`laplace`] — half-line Helmholtz solves through the explicit Green
//!   function, with gain-of-derivative checks;
//! * [`rayleigh`] — the inviscid spectral problem and the most unstable mode;
//! * [`orrsomm`] — the viscous spectral core: resolvent, eigenvalue
//!   continuation, pseudoinverse, decay diagnostics, alpha = 0 heat resolvent;
//! * [`cascade`] — the nonlinear mode hierarchy driven by per-level
//!   Orr-Sommerfeld solves with convolution sources;
//! * [`hopf`] — per-level generator values, the quadratic recursion and the
//!   majorant/characteristics convergence certificate;
//! * [`oracle`] — independent time integration of the linearized equations,
//!   used to cross-validate growth rates;
//! * [`cli`] — the experiment runner behind the `oslab` binary.

pub mod blnorm;
mod numeric;
pub mod cascade;
pub mod cli;
pub mod field;
pub mod grid;
pub mod hopf;
pub mod laplace;
pub mod oracle;
pub mod orrsomm;
pub mod profile;
pub mod rayleigh;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 8 points, got {0}")]
    TooFewPoints(usize),
    #[error("map scale must be positive, got {0}")]
    BadMapScale(f64),
    #[error("derivative order must be in 1..=4, got {0}")]
    BadDerivativeOrder(usize),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("coordinate must be nonnegative, got {0}")]
    NegativeCoordinate(f64),
    #[error("profile does not support derivative order {0}")]
    UnsupportedOrder(usize),
    #[error("wavenumber alpha must be nonzero")]
    ZeroWavenumber,
    #[error("wavenumber out of admissible range: {0}")]
    WavenumberOutOfRange(String),
    #[error("no unstable mode: {0}")]
    NoUnstableMode(String),
    #[error("eigenvalue continuation failed: {0}")]
    ContinuationFailed(String),
    #[error("operator near-singular (condition estimate {0:.3e}); switch to the pseudoinverse")]
    NearSingular(f64),
    #[error("eigenvalue is not simple: {0}")]
    EigenvalueNotSimple(String),
    #[error("delta alpha^2 constraint violated: |delta alpha^2| = {0:.3e} >= 1")]
    DeltaAlphaConstraint(f64),
    #[error("Re lambda below the resolvent threshold: {0}")]
    LambdaBelowThreshold(String),
    #[error("cascade level {0} has not been built")]
    MissingLevel(usize),
    #[error("tau {tau:.3e} exceeds 0.9 of the estimated convergence radius {rho_est:.3e}")]
    ConvergenceRadiusExceeded { tau: f64, rho_est: f64 },
    #[error("need at least {needed} cascade levels, have {have}")]
    InsufficientLevels { needed: usize, have: usize },
    #[error("velocity pair is not divergence-free (residual {0:.3e})")]
    NotDivergenceFree(f64),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("missing upstream artifact: {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
