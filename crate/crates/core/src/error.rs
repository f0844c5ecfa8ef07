use thiserror::Error;

use crate::euler::FlowState;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Fields live on different grids, or an array has the wrong shape.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Density became nonpositive. Carries the last state for diagnosis when available.
    #[error("positivity lost at t = {time}: min rho = {min_rho:e}")]
    Positivity {
        time: f64,
        min_rho: f64,
        snapshot: Option<Box<FlowState>>,
    },

    /// Requested time step exceeds the stability bound.
    #[error("stability error: {0}")]
    Stability(String),

    /// Coercivity bound of the relative energy failed on an evaluation.
    #[error("coercivity violated: value {value:e} < {bound:e}")]
    Coercivity { value: f64, bound: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        LabError::Dimension(msg.into())
    }

    /// True for errors coming from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::Positivity { .. } | LabError::Stability(_) | LabError::Coercivity { .. }
        )
    }
}
