use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("theta series does not converge within the truncation window at u = {u} (boundary ratio {ratio:e})")]
    ThetaTruncation { u: String, ratio: f64 },

    #[error("pole proximity in {factor}: |theta| = {modulus:e} below guard")]
    PoleProximity { factor: String, modulus: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shift {shift} exceeds the bound {bound}")]
    ShiftOverflow { shift: i32, bound: i32 },

    #[error("lattice window [{lo}, {hi}] too small for shifts [{min_shift}, {max_shift}]")]
    WindowUnderflow { lo: i32, hi: i32, min_shift: i32, max_shift: i32 },

    #[error("representation has no unique highest-weight vector")]
    NoHighestWeight,

    #[error("weight subspace {0} is empty")]
    EmptyWeightSpace(i32),

    #[error("coincident spectral points u[{0}] and u[{1}]")]
    CoincidentPoints(usize, usize),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("degenerate state: norm {0:e}")]
    DegenerateState(f64),

    #[error("random sampling hit pole guards {0} times in a row")]
    ResampleCap(usize),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("invalid config value for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("cannot parse complex number `{0}`")]
    ComplexParse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
