use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spectral parameter {xi} is within {eps:e} of a branch point")]
    BranchPoint { xi: Complex64, eps: f64 },

    #[error("sheet {sheet} is inconsistent with xi = {xi}")]
    SheetMismatch { xi: Complex64, sheet: &'static str },

    #[error("p = {p} is not a square root of xi^2 - rho^2 at xi = {xi} (residual {residual:e})")]
    InconsistentPair {
        xi: Complex64,
        p: Complex64,
        residual: f64,
    },

    #[error("uniformization variable z = {z} is too close to the origin")]
    Origin { z: Complex64 },

    #[error("potential misses its {side} limit by {deviation:e} (tolerance {tolerance:e})")]
    BoundaryMismatch {
        side: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("Jost integration diverged near x = {x} (norm {norm:e})")]
    IntegrationDiverged { x: f64, norm: f64 },

    #[error("root refinement in [{lo}, {hi}] did not converge after {iterations} iterations")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },

    #[error("eigenvalues {first} and {second} collide; a double root is suspected")]
    DoubleRootSuspected { first: f64, second: f64 },

    #[error("the potential has no discrete eigenvalues")]
    NoEigenvalues,

    #[error("derivative of a at xi = {xi} is degenerate ({modulus:e})")]
    DerivativeDegenerate { xi: f64, modulus: f64 },

    #[error("Jost solutions at xi = {xi} are not proportional (component ratios differ by {mismatch:e})")]
    ProportionalityViolation { xi: f64, mismatch: f64 },

    #[error("time function has {samples} samples on [0, {t}], at least 2 are required")]
    QuadratureUnderResolved { samples: usize, t: f64 },

    #[error("t = {t} lies outside the tabulated range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("time function `{name}` must be real valued, found imaginary part {imag:e} at t = {t}")]
    NotReal { name: &'static str, t: f64, imag: f64 },

    #[error("expected {expected} source terms, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("|r| = {modulus} at z = {z} is too close to 1 for the kernel integral")]
    KernelDivergence { z: f64, modulus: f64 },

    #[error("Nystrom system at x = {x} is singular (condition estimate {condition:e})")]
    SingularSystem { x: f64, condition: f64 },

    #[error("GLM tail at x = {x} is too short: |F| = {tail:e} at the last node")]
    TailTooShort { x: f64, tail: f64 },

    #[error("iterative solve at x = {x} stalled with relative residual {residual:e}")]
    SolverStalled { x: f64, residual: f64 },

    #[error("source term {n}: overlap integral {overlap:e} is too small to normalize")]
    DegenerateOverlap { n: usize, overlap: f64 },

    #[error("source term {n}: bilinear constraint drifts by {drift:e} across the grid")]
    ConstraintViolation { n: usize, drift: f64 },

    #[error("grid mismatch: expected {expected} points, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("at z = {z}: {source}")]
    AtSpectralNode { z: f64, source: Box<Error> },

    #[error("at x = {x}: {source}")]
    AtPosition { x: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
