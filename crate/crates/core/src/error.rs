use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("d = {0} is not a squarefree integer >= 2")]
    BadField(u32),
    #[error("cannot parse exact rational from {0:?}")]
    Parse(String),
    #[error("group mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("window coordinate {coord} is empty (lo > hi)")]
    EmptyWindow { coord: usize },
    #[error("window is not a symmetric neighbourhood of the identity")]
    NotSymmetric,
    #[error("invalid point-set descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("parametrization is singular over the coefficient field")]
    SingularParametrization,
    #[error("parameter bounds overflow: {0}")]
    ParameterOverflow(String),
    #[error("physical projection is not injective: {0}")]
    NonInjectiveProjection(String),
    #[error("radius {requested} exceeds the reliable radius {available}")]
    RadiusExceeded { requested: String, available: String },
    #[error("patch radii differ ({0} vs {1})")]
    RadiusMismatch(String, String),
    #[error("restriction of source class {class} is missing from the target catalog")]
    MissingRefinementTarget { class: usize },
    #[error("sample does not cover the radius: {0}")]
    InsufficientCoverage(String),
    #[error("patches are equal; nothing to separate")]
    IdenticalPatches,
    #[error("no separating compact set fits inside the reliable radius")]
    NoSeparatingCompact,
    #[error("radius budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{point} is not a point of the patch")]
    NotMember { point: String },
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("arrows do not share the required unit: {0}")]
    UnitMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// The input itself is malformed, as opposed to a computation that
    /// could not be carried out.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Parse(_)
                | Error::BadField(_)
                | Error::EmptyWindow { .. }
                | Error::InvalidDescriptor(_)
                | Error::NotSymmetric
                | Error::KindMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
