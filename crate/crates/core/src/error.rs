use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge on [{lo}, {hi}] after {subdivisions} subdivisions (error estimate {estimate:e})")]
    QuadratureNonConvergence {
        lo: f64,
        hi: f64,
        subdivisions: usize,
        estimate: f64,
    },

    #[error("argument {z} lies within {distance:e} of a pole of tanh")]
    NearPole { z: String, distance: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pairing assumption unverified at beta_high = {beta_high}: largest eigenvalue {lambda_max} does not exceed 1")]
    BracketHigh { beta_high: f64, lambda_max: f64 },

    #[error("largest eigenvalue {lambda_max} at beta_low = {beta_low} is not below 1")]
    BracketLow { beta_low: f64, lambda_max: f64 },

    #[error("top eigenvalue {value} is degenerate (next eigenvalue {next}, relative gap {relative_gap:e})")]
    DegenerateTopEigenvalue {
        value: f64,
        next: f64,
        relative_gap: f64,
    },

    #[error("power iteration and dense eigenvalue disagree: {dense} vs {power}")]
    EigenVerification { dense: f64, power: f64 },

    #[error("root finding for beta_c did not converge: {0}")]
    RootFinding(String),

    #[error("degenerate gap profile: slope denominator {0:e} is numerically zero")]
    DegenerateProfile(f64),

    #[error("gap profile not defined at momentum {0}")]
    ProfileOutOfRange(f64),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
