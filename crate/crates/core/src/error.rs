use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the symbolic and numeric stages can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("denominator vanishes at the evaluation point ({0})")]
    SingularPoint(String),
    #[error("ideal is not zero-dimensional: no pure power of d{0} leads a basis element")]
    NotZeroDimensional(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("integrability condition violated for directions {0} and {1}")]
    IntegrabilityViolation(usize, usize),
    #[error("holonomic functions use different base points or variable contexts")]
    BasePointMismatch,
    #[error("extraction row is identically zero")]
    RankDeficientExtract,
    #[error("Pfaffian basis does not start with the monomial 1")]
    BasisNotCanonical,
    #[error("base point lies on the singular locus: {0}")]
    SingularBasePoint(String),
    #[error("no admissible solution: {0}")]
    NoSolution(String),
    #[error("integration path crosses the singular locus near {point:?} (try a detour through {detour:?})")]
    SingularPathCrossing { point: Vec<f64>, detour: Vec<f64> },
    #[error("integrator exceeded {0} steps")]
    StepLimitExceeded(usize),
    #[error("implicit-function Jacobian is singular at x = {0:?}")]
    JacobianSingular(Vec<f64>),
    #[error("Newton iteration did not converge at x = {0:?}")]
    NewtonDivergence(Vec<f64>),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported atom: {0}")]
    UnsupportedAtom(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDenominator => "ZeroDenominator",
            Error::SingularPoint(_) => "SingularPoint",
            Error::NotZeroDimensional(_) => "NotZeroDimensional",
            Error::ResourceLimit(_) => "ResourceLimit",
            Error::IntegrabilityViolation(..) => "IntegrabilityViolation",
            Error::BasePointMismatch => "BasePointMismatch",
            Error::RankDeficientExtract => "RankDeficientExtract",
            Error::BasisNotCanonical => "BasisNotCanonical",
            Error::SingularBasePoint(_) => "SingularBasePoint",
            Error::NoSolution(_) => "NoSolution",
            Error::SingularPathCrossing { .. } => "SingularPathCrossing",
            Error::StepLimitExceeded(_) => "StepLimitExceeded",
            Error::JacobianSingular(_) => "JacobianSingular",
            Error::NewtonDivergence(_) => "NewtonDivergence",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnsupportedAtom(_) => "UnsupportedAtom",
            Error::Dimension(_) => "DimensionMismatch",
            Error::Invalid(_) => "InvalidInput",
        }
    }
}
