use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the spectral pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined roots: all polynomial coefficients are zero")]
    ZeroPolynomial,

    #[error("root finder did not converge after {iterations} iterations (worst residual {residual:e})")]
    RootsNotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have at least one row")]
    EmptyMatrix,

    #[error("eigenvalue iteration failed to converge at index {index} after {iterations} sweeps")]
    EigenNotConverged { index: usize, iterations: usize },

    #[error("invalid Blaschke product: {0}")]
    InvalidBlaschke(String),

    #[error("point {point} is within tolerance of the pole 1/conj(a) for zero a = {zero}")]
    NearPole { point: Complex64, zero: Complex64 },

    #[error("map is not expanding on the unit circle (min |B'| = {min_derivative_modulus})")]
    NotExpanding { min_derivative_modulus: f64 },

    #[error("fixed point iteration failed: {0}")]
    FixedPointFailure(String),

    #[error("expected {expected} fixed points on the unit circle, found {found}")]
    CircleFixedPointCount { expected: usize, found: usize },

    #[error("no admissible annulus found: {0}")]
    NoAdmissibleAnnulus(String),

    #[error("invalid annulus: need 0 < r < 1 < R, got r = {r}, R = {big_r}")]
    InvalidAnnulus { r: f64, big_r: f64 },

    #[error("radius ordering violated: need r < r' < 1 < R' < R")]
    RadiusOrdering,

    #[error("inverse branch residual {residual:e} at z = {point} exceeds threshold")]
    BranchResidual { point: Complex64, residual: f64 },

    #[error("probe {point} is closer than {min_distance} to the annulus boundary")]
    ProbeTooClose { point: Complex64, min_distance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
