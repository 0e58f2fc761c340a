use thiserror::Error;

/// Errors raised by the gyrovector-space operations and their plumbing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GyroError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not lower triangular with positive diagonal: {0}")]
    NotLowerTriPos(String),
    #[error("frame is not orthonormal: {0}")]
    NotOrthonormal(String),
    #[error("matrix is not a rank-p orthogonal projector: {0}")]
    NotProjector(String),
    #[error("point lies in the cut locus of the identity subspace: {0}")]
    CutLocus(String),
    #[error("gyroangle undefined, a gyrovector has vanishing norm")]
    DegenerateAngle,
    #[error("hypergyroplane normal has vanishing norm")]
    DegeneratePlane,
    #[error("training did not decrease the loss: {0}")]
    NonConvergence(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("ranking query has no candidates (query {0})")]
    EmptyQuery(usize),
    #[error("random generator failed to produce an admissible sample after {0} redraws")]
    GeneratorStall(usize),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("document kind violation: {0}")]
    KindViolation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl GyroError {
    /// Variant name, as printed on the diagnostic stream by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            GyroError::NonFinite => "NonFinite",
            GyroError::NotSpd(_) => "NotSpd",
            GyroError::NotSymmetric(_) => "NotSymmetric",
            GyroError::DimMismatch(_) => "DimMismatch",
            GyroError::NotLowerTriPos(_) => "NotLowerTriPos",
            GyroError::NotOrthonormal(_) => "NotOrthonormal",
            GyroError::NotProjector(_) => "NotProjector",
            GyroError::CutLocus(_) => "CutLocus",
            GyroError::DegenerateAngle => "DegenerateAngle",
            GyroError::DegeneratePlane => "DegeneratePlane",
            GyroError::NonConvergence(_) => "NonConvergence",
            GyroError::InvalidConfig(_) => "InvalidConfig",
            GyroError::EmptyQuery(_) => "EmptyQuery",
            GyroError::GeneratorStall(_) => "GeneratorStall",
            GyroError::ParseError(_) => "ParseError",
            GyroError::KindViolation(_) => "KindViolation",
            GyroError::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for GyroError {
    fn from(e: std::io::Error) -> Self {
        GyroError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GyroError>;
