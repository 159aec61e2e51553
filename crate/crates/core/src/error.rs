use std::path::PathBuf;

use crate::quantum::Basis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameter values or contract violations by the caller.
    Usage,
    /// Malformed or physically inconsistent input data.
    Data,
    /// The numerics could not produce a trustworthy answer.
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("temperature underflow: Boltzmann factors are not finite at T = {temperature:e} K")]
    TemperatureUnderflow { temperature: f64 },

    #[error("state is in the {found:?} basis, expected {expected:?}")]
    WrongBasis { expected: Basis, found: Basis },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("nonpositive state: correlation c = {c} outside [-1, 1/3]")]
    NonpositiveState { c: f64 },

    #[error("state outside Bell-diagonal family: coherence {coherence} > 1")]
    OutsideBellDiagonal { coherence: f64 },

    #[error("unphysical data point at T = {temperature} K: correlation c = {c}")]
    UnphysicalPoint { temperature: f64, c: f64 },

    #[error("no level crossing for J/k_B = {j_over_kb} K (requires antiferromagnetic J < 0)")]
    NoLevelCrossing { j_over_kb: f64 },

    #[error("critical field not bracketed in [0, {upper} T]")]
    CriticalFieldNotBracketed { upper: f64 },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("degenerate fit: Jacobian is singular at J/k_B = {j_over_kb}, g = {g}")]
    DegenerateFit { j_over_kb: f64, g: f64 },

    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("extrapolation refused: pressure {pressure} GPa outside [{min}, {max}] GPa")]
    Extrapolation { pressure: f64, min: f64, max: f64 },

    #[error("closed form {closed_form} disagrees with oracle {oracle} at {context}")]
    OracleMismatch {
        closed_form: f64,
        oracle: f64,
        context: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_)
            | Error::WrongBasis { .. }
            | Error::NoLevelCrossing { .. }
            | Error::OutsideBellDiagonal { .. } => ErrorClass::Usage,
            Error::InvalidState(_)
            | Error::NonpositiveState { .. }
            | Error::UnphysicalPoint { .. }
            | Error::Parse { .. }
            | Error::Extrapolation { .. }
            | Error::Io { .. }
            | Error::Json(_) => ErrorClass::Data,
            Error::TemperatureUnderflow { .. }
            | Error::CriticalFieldNotBracketed { .. }
            | Error::DegenerateFit { .. }
            | Error::NotConverged { .. }
            | Error::OracleMismatch { .. } => ErrorClass::Numeric,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
