//! Structured kernel errors.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("operand shape mismatch: left has n={left_nvars}, cap={left_cap}; right has n={right_nvars}, cap={right_cap}")]
    ShapeMismatch {
        left_nvars: usize,
        left_cap: u32,
        right_nvars: usize,
        right_cap: u32,
    },

    #[error("variable index {index} out of range 1..={nvars}")]
    IndexOutOfRange { index: usize, nvars: usize },

    #[error("degree error: {0}")]
    Degree(String),

    #[error("linear part is singular over the rationals")]
    SingularLinearPart,

    #[error("truncation cap {cap} too small: {reason}")]
    InsufficientTruncation { cap: u32, reason: String },

    #[error("input is not linear: {0}")]
    NotLinear(String),

    #[error("input is not a Nambu structure: {0}")]
    NotNambu(String),

    #[error("classification failure: {0}")]
    ClassificationFailure(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{context}: 2-cocycle identity violated at degree {degree} (component {component})")]
    CocycleIdentity {
        context: String,
        degree: u32,
        component: String,
    },

    #[error("{context}: linear system inconsistent at degree {degree} (component {component})")]
    InconsistentSystem {
        context: String,
        degree: u32,
        component: String,
    },

    #[error("window invariance check failed at degree {degree}: {detail}")]
    InvarianceFailure { degree: u32, detail: String },

    #[error("unsupported group action: {0}")]
    UnsupportedAction(String),

    #[error("linearization step {step}: {source}")]
    Step {
        step: u32,
        #[source]
        source: Box<KernelError>,
    },
}

pub type Result<T> = std::result::Result<T, KernelError>;
