use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entry is not finite")]
    NonFinite,

    #[error("eigenvalue {eigenvalue} lies on the excluded ray {{-iy : y >= 0}}")]
    SpectrumOnCut { eigenvalue: Complex64 },

    #[error("eigenvalue {eigenvalue} is not in the open upper half-plane")]
    SpectrumNotUpper { eigenvalue: Complex64 },

    #[error("adaptive quadrature stopped after {evaluations} evaluations with error estimate {error_estimate:e}")]
    QuadratureFailure {
        evaluations: usize,
        error_estimate: f64,
    },

    #[error("{what}: extrapolation did not settle (residual {residual:e}, tolerance {tolerance:e})")]
    NoConvergence {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("extracted potential is not trace-free (trace {trace:e})")]
    NotTraceless { trace: f64 },

    #[error("point {point} is within the endpoint margin of the gap endpoint {endpoint}")]
    EndpointSingularity { point: Complex64, endpoint: f64 },

    #[error("point {z} is below the real axis")]
    NotUpperHalfPlane { z: Complex64 },

    #[error("profile angles are not uniform across gaps")]
    NotUniform,

    #[error("real-axis continuation needs a piecewise-constant profile")]
    ContinuationUnavailable,

    #[error("invalid gap set: {0}")]
    InvalidGapSet(String),

    #[error("invalid Krein profile: {0}")]
    InvalidProfile(String),

    #[error("invalid step potential: {0}")]
    InvalidPotential(String),

    #[error("M J is not diagonalizable with eigenvalues +1 and -1 (got {0} and {1})")]
    DegenerateEigenproblem(Complex64, Complex64),

    #[error("det M = {det}, expected -1")]
    InvalidDeterminant { det: Complex64 },

    #[error("m+ + m- vanishes; M has a pole here")]
    PoleAt,

    #[error("no exponential dichotomy at z = {z}: spectral exponent {exponent} is on the imaginary axis")]
    DegenerateDichotomy { z: Complex64, exponent: Complex64 },

    #[error("step controller gave up at x = {x} (step {step:e})")]
    StepRejected { x: f64, step: f64 },

    #[error("t = {t} is not inside a gap")]
    NotInGap { t: f64 },

    #[error("t = {t} is not in the interior of the spectral set E")]
    NotInSpectralSet { t: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("matrix is not admissible: {0}")]
    NotAdmissible(String),

    #[error("||W({x})|| = {norm} exceeds the bound {bound}")]
    BoundViolation { x: f64, norm: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
