use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("covariance matrix is not positive definite")]
    NonPositiveDefinite,
    #[error("drift matrix has an eigenvalue with non-negative real part ({max_real:.3e})")]
    UnstableDrift { max_real: f64 },
    #[error("adaptive step collapsed below {min_step:.3e} s")]
    StepUnderflow { min_step: f64 },
    #[error("closed-form denominator {which} vanished")]
    DegenerateDenominator { which: &'static str },
    #[error("quadrature did not reach tolerance (estimated error {estimate:.3e})")]
    QuadratureFailure { estimate: f64 },
    #[error("voxel edge {voxel:.3e} m exceeds r_c = {r_c:.3e} m")]
    ResolutionTooCoarse { voxel: f64, r_c: f64 },
    #[error("homodyne measurement has no finite covariance; use the homodyne path")]
    HomodyneNotFinite,
    #[error("outcome covariance is not positive definite")]
    SingularMeasCov,
    #[error("state is too close to pure for the single-mode formula")]
    NearPure,
    #[error("SLD equation diverges for a pure symplectic mode")]
    PureStateDivergence,
    #[error("Richardson estimates disagree ({first:.6e} vs {second:.6e})")]
    StepSelectionFailure { first: f64, second: f64 },
    #[error("argument {x} is outside the domain")]
    DomainError { x: f64 },
    #[error("outcome probability vanished")]
    DegenerateOutcome,
    #[error("degenerate spectrum with a non-vanishing coherence derivative")]
    DegenerateSpectrum,
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    ValidationError { key: String, message: String },
    #[error("i/o error: {0}")]
    IoError(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoError(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
