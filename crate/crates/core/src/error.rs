use thiserror::Error;

use crate::dataset::Violation;
use crate::simplex::LpError;

#[derive(Debug, Error)]
pub enum VgaError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid dataset: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("unknown DMU id `{0}`")]
    UnknownDmu(String),

    #[error("DMU `{dmu}` has a zero value for {index}; every input and output of the assessed unit must be positive")]
    ZeroAssessedValue { dmu: String, index: String },

    #[error("SIC scalar must be positive and finite, got {0}")]
    InvalidKappa(f64),

    #[error("program is infeasible: {0}")]
    Infeasible(String),

    #[error("program is unbounded: {0}")]
    Unbounded(String),

    #[error("kappa {kappa} is outside feasible interval [{min}, {max}]")]
    OutsideInterval { kappa: f64, min: f64, max: f64 },

    #[error("session is already finalized")]
    AlreadyFinalized,

    #[error("cannot exclude {0:?}: not a best peer of the assessed DMU")]
    NotAPeer(Vec<String>),

    #[error(transparent)]
    Lp(#[from] LpError),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl VgaError {
    /// Whether the error comes from bad input data or arguments, as opposed to an
    /// infeasible or rejected scalar.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            VgaError::Parse { .. }
                | VgaError::Json(_)
                | VgaError::Validation(_)
                | VgaError::UnknownDmu(_)
                | VgaError::ZeroAssessedValue { .. }
                | VgaError::InvalidKappa(_)
                | VgaError::NotAPeer(_)
        )
    }

    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            VgaError::Infeasible(_) | VgaError::Unbounded(_) | VgaError::OutsideInterval { .. }
        )
    }
}

pub type Result<T, E = VgaError> = std::result::Result<T, E>;
