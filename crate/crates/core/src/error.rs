use thiserror::Error;

/// Every failure the library can report.
///
/// Precision failures are always reported as errors rather than folded
/// into a boolean verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("division by an element that is zero at the working precision")]
    DivisionByApproxZero,
    #[error("extension with ramification index {e} divisible by p = {p} is wild")]
    WildExtension { p: u64, e: u32 },
    #[error("polynomial is not Eisenstein: {0}")]
    NotEisenstein(String),
    #[error("precision too low to separate roots: {0}")]
    PrecisionTooLowToSeparateRoots(String),
    #[error("polynomial is inseparable at the working precision")]
    Inseparable,
    #[error("incompatible fields: {0}")]
    FieldMismatch(String),
    #[error("zero at the working precision")]
    ZeroAtPrecision,
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(String),
    #[error("element does not lie in the torus: {0}")]
    NotInTorus(String),
    #[error("{0} is not a filtration break at this point")]
    NotABreak(String),
    #[error("element is not regular semisimple: {0}")]
    NotRegular(String),
    #[error("element is not compact: {0}")]
    NotCompact(String),
    #[error("torus does not split over a tame extension: {0}")]
    WildTorus(String),
    #[error("verdict is ambiguous at the working precision: {0}")]
    AmbiguousAtPrecision(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("depth range outside the abelian range r <= t <= 2r: {0}")]
    OutOfAbelianRange(String),
    #[error("enumeration of {count} cosets exceeds the cap {cap}")]
    EnumerationTooLarge { count: String, cap: u64 },
    #[error("point is not fixed by the element: {0}")]
    PointNotFixed(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientPrecision(_) => "InsufficientPrecision",
            Error::DivisionByApproxZero => "DivisionByApproxZero",
            Error::WildExtension { .. } => "WildExtension",
            Error::NotEisenstein(_) => "NotEisenstein",
            Error::PrecisionTooLowToSeparateRoots(_) => "PrecisionTooLowToSeparateRoots",
            Error::Inseparable => "Inseparable",
            Error::FieldMismatch(_) => "FieldMismatch",
            Error::ZeroAtPrecision => "ZeroAtPrecision",
            Error::NonPositiveDepth(_) => "NonPositiveDepth",
            Error::NotInTorus(_) => "NotInTorus",
            Error::NotABreak(_) => "NotABreak",
            Error::NotRegular(_) => "NotRegular",
            Error::NotCompact(_) => "NotCompact",
            Error::WildTorus(_) => "WildTorus",
            Error::AmbiguousAtPrecision(_) => "AmbiguousAtPrecision",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::OutOfAbelianRange(_) => "OutOfAbelianRange",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::PointNotFixed(_) => "PointNotFixed",
            Error::Dimension(_) => "Dimension",
            Error::InvalidGroup(_) => "InvalidGroup",
            Error::Parse { .. } => "ParseError",
            Error::Config(_) => "Config",
        }
    }

    /// True for failures caused by the finite working precision.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::InsufficientPrecision(_)
                | Error::DivisionByApproxZero
                | Error::PrecisionTooLowToSeparateRoots(_)
                | Error::AmbiguousAtPrecision(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
