use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("equation for `{variable}` has non-positive coefficient {coefficient}")]
    NotMonotone { variable: String, coefficient: String },

    /// No pivot exists in `column`; the Newton iterate is undefined.
    #[error("singular matrix: no nonzero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("equation for `{variable}` has a monomial of degree {degree} (at most 2 supported)")]
    DegreeTooHigh { variable: String, degree: u32 },

    /// A property that holds for every system with a finite least fixed
    /// point was violated by an iterate.
    #[error("no finite least fixed point: {reason}")]
    DivergenceCertified { reason: String },

    #[error("required rounding parameter h = {required} exceeds the ceiling {ceiling}")]
    ParamsInfeasible { required: String, ceiling: u64 },

    #[error("equation has no finite least fixed point")]
    NoFiniteLfp,

    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
