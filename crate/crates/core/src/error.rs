use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MuntzError {
    #[error("argument {t} exceeds the materialized horizon {horizon} of an explicit sequence")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("exponents must be strictly increasing and positive (offending index {index})")]
    NonpositiveGap { index: usize },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("log-gamma pole at {0}")]
    GammaPole(Complex64),
    #[error("point {z} lies within {distance:e} of the pole {pole}")]
    PoleProximity { z: Complex64, pole: f64, distance: f64 },
    #[error("|z| = {modulus} needs exponents beyond {available}; raise the truncation order")]
    TruncationInsufficient { modulus: f64, available: f64 },
    #[error("log-modulus {0} leaves the double-precision range")]
    Overflow(f64),
    #[error("point {0} is outside the sieve region")]
    SieveViolation(Complex64),
    #[error("horizon {horizon} too small: the infimum is still decreasing at the right edge")]
    HorizonTooSmall { horizon: f64 },
    #[error("argument {zeta} outside the convergence domain of the transform along L_{line}")]
    DomainViolation { line: i8, zeta: Complex64 },
    #[error("half-line integral along L_{line} at {zeta} does not decay")]
    Nonconvergent { line: i8, zeta: Complex64 },
    #[error("coefficient {index} is ill-conditioned: |psi_k(lambda_k)| e^(-delta lambda_k) = {scale:e} against error {error:e}")]
    IllConditioned { index: usize, scale: f64, error: f64 },
    #[error("|z| = {0} >= 1: the expansion is not guaranteed to converge")]
    DivergenceRisk(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, MuntzError>;
