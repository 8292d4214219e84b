use std::fmt;

use thiserror::Error;

/// Which admissibility condition a matrix pair failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Condition {
    /// Boundary matching: `0 = b0 < Φ(A0;1) = b1/d1 < Φ(A1;1) = 1`.
    A1,
    /// Positive determinants.
    A2,
    /// Contraction: `sqrt(det A_i) < min{d_i, c_i + d_i}`.
    A3,
    /// Consequences of the three conditions (`d0 > a0 > 0`, `b1 + c1 > 0`, `alpha > -1`).
    Derived,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::A1 => "A1",
            Condition::A2 => "A2",
            Condition::A3 => "A3",
            Condition::Derived => "derived",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.detail)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole: denominator vanishes at z = {z}")]
    Pole { z: String },
    #[error("cannot renormalize the zero matrix")]
    ZeroMatrix,
    #[error("invalid system: {}", join(.0))]
    Validation(Vec<Violation>),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("no convergence within depth cap {cap}")]
    NonConvergence { cap: usize },
    #[error("normal form mismatch: {0}")]
    FormMismatch(String),
    #[error("condition (i) holds; the entropy-defect construction is undefined")]
    ConditionHolds,
    #[error("system is not absolutely continuous")]
    NotAbsolutelyContinuous,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable name of the variant, used in machine-readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Pole { .. } => "PoleError",
            Error::ZeroMatrix => "ZeroMatrixError",
            Error::Validation(_) => "ValidationError",
            Error::Domain(_) => "DomainError",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::FormMismatch(_) => "FormMismatch",
            Error::ConditionHolds => "ConditionHoldsError",
            Error::NotAbsolutelyContinuous => "NotAbsolutelyContinuous",
            Error::Parse(_) => "ParseError",
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
