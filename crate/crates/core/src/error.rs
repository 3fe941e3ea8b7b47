use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Conjecture-violation candidates. Each one contradicts a proved statement,
/// so seeing one at runtime almost certainly means an arithmetic bug.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnomalyKind {
    /// No p-adic unit coefficient below the inspection cap.
    LambdaAtCap,
    /// Every inspected coefficient vanished at its precision.
    MuPositive,
    /// Some component has lambda outside `1..=p-1`.
    LambdaBound,
    EisensteinFailure,
    Check1False,
    Check2False,
    StructureMismatch,
    GrowthMismatch,
    NormKernel,
}

impl AnomalyKind {
    pub fn code(self) -> &'static str {
        match self {
            AnomalyKind::LambdaAtCap => "LAMBDA_AT_CAP",
            AnomalyKind::MuPositive => "MU_POSITIVE",
            AnomalyKind::LambdaBound => "LAMBDA_BOUND",
            AnomalyKind::EisensteinFailure => "EISENSTEIN_FAILURE",
            AnomalyKind::Check1False => "CHECK1_FALSE",
            AnomalyKind::Check2False => "CHECK2_FALSE",
            AnomalyKind::StructureMismatch => "STRUCTURE_MISMATCH",
            AnomalyKind::GrowthMismatch => "GROWTH_MISMATCH",
            AnomalyKind::NormKernel => "NORM_KERNEL",
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("division by an element indistinguishable from zero")]
    DivisionByZero,
    #[error("not a principal unit (x is not 1 mod p): {0}")]
    NotPrincipalUnit(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Two independent code paths disagree.
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("{kind}: {detail}")]
    Anomaly { kind: AnomalyKind, detail: String },
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub fn anomaly(kind: AnomalyKind, detail: impl Into<String>) -> Self {
        Error::Anomaly {
            kind,
            detail: detail.into(),
        }
    }
}
