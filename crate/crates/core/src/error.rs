use std::fmt;

use crate::series::Window;

/// Axis of a bivariate system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("series has zero constant term and is not a unit")]
    ZeroConstantTerm,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not invertible as monomial times unit: {0}")]
    SingularMatrix(String),

    #[error("truncation exhausted while {context} (window {window})")]
    TruncationExhausted { context: String, window: Window },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("integrability violated: {context} (window {window})")]
    IntegrabilityViolation { context: String, window: Window },

    #[error("not splittable: {0}")]
    NotSplittable(String),

    #[error("algebraic extension required for factor {factor}")]
    AlgebraicExtensionRequired { factor: String },

    #[error("ramification of order {index} required on axis {axis}")]
    RamificationRequired { axis: Axis, index: u32 },

    #[error("joint resonance at monomials {monomials:?}")]
    JointResonance { monomials: Vec<(u32, u32)> },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroConstantTerm => "ZeroConstantTerm",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularMatrix(_) => "SingularMatrix",
            Error::TruncationExhausted { .. } => "TruncationExhausted",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::IntegrabilityViolation { .. } => "IntegrabilityViolation",
            Error::NotSplittable(_) => "NotSplittable",
            Error::AlgebraicExtensionRequired { .. } => "AlgebraicExtensionRequired",
            Error::RamificationRequired { .. } => "RamificationRequired",
            Error::JointResonance { .. } => "JointResonance",
            Error::Parse { .. } => "ParseError",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 integrability, 2 input (parse, schema, structural preconditions),
    /// 3 truncation, 4 field or ramified extension needed, 5 joint resonance.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IntegrabilityViolation { .. } => 1,
            Error::Parse { .. }
            | Error::InvariantViolation(_)
            | Error::Io(_)
            | Error::DimensionMismatch(_)
            | Error::PreconditionViolated(_)
            | Error::SingularMatrix(_)
            | Error::ZeroConstantTerm
            | Error::NotSplittable(_) => 2,
            Error::TruncationExhausted { .. } => 3,
            Error::AlgebraicExtensionRequired { .. } | Error::RamificationRequired { .. } => 4,
            Error::JointResonance { .. } => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
