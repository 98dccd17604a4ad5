use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mesh size {h} does not divide the box side {side}")]
    MeshSize { h: f64, side: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("projected SOR did not converge after {sweeps} sweeps (measure {measure:e})")]
    PsorNotConverged { sweeps: usize, measure: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("obstacle inactive for f = {f}, obstacle = {phi}; the linear solution applies")]
    ObstacleInactive { f: f64, phi: f64 },

    #[error("no sign change of the contact condition on the bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("flux equals gradient: beta undefined (P1 = 0 with P2 = {p2:e})")]
    FluxEqualsGradient { p2: f64 },

    #[error("nonzero trace on the inscribed boundary (max |v| = {0:e})")]
    NonzeroTrace(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
