use thiserror::Error;

/// Errors reported by the estimators and evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("derivative undefined at jump u = {u}")]
    DerivativeUndefined { u: f64 },

    #[error("orbit point x_{n} = {x_n} hits a derivative jump of the ridge function")]
    OrbitHitsJump { n: usize, x_n: f64 },

    #[error("{op} requires the {expected} ridge")]
    WrongRidge {
        op: &'static str,
        expected: &'static str,
    },

    #[error("{op} requires base b = 2, got b = {b}")]
    BaseMustBeTwo { op: &'static str, b: u32 },

    #[error("need {needed} digits, only {available} available")]
    NotEnoughDigits { needed: usize, available: usize },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    QuadratureNotConverged { estimate: f64, error_estimate: f64 },

    #[error("lambda = {lambda} outside the domain of h_{b}: {reason}")]
    Domain { b: u32, lambda: f64, reason: String },

    #[error("no sign change of h_{b} found in scan: {scan}")]
    NoSignChange { b: u32, scan: String },

    #[error("{count} sign changes of h_{b} found in scan (expected exactly one): {scan}")]
    MultipleSignChanges { b: u32, count: usize, scan: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("trivial regime: |z| = {z_abs} <= 2r = {two_r}, no schedule needed")]
    TrivialRegime { z_abs: f64, two_r: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
