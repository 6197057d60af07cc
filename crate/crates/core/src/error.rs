use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("basis index {index} out of range for dimension {dim}")]
    BadBasisIndex { index: usize, dim: usize },
    #[error("identity input on a {head}x{tail} edge")]
    IdentityOnRectangular { head: usize, tail: usize },
    #[error("graph has free cells")]
    FreeCellPresent,
    #[error("graph has random cells")]
    RandomCellPresent,
    #[error("expected {expected} free cells, found {found}")]
    FreeCellCountMismatch { expected: String, found: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("cell kind mismatch: {0}")]
    CellKindMismatch(String),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("pairing is not admissible: {0}")]
    NotAdmissible(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("activation is not polynomial")]
    NonPolynomial,
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("covariance is not positive semidefinite (det = {0})")]
    PsdViolation(f64),
    #[error("partition is not non-crossing")]
    NotNonCrossing,
    #[error("leaf mode mismatch: {0}")]
    LeafModeMismatch(String),
    #[error("no layer {0} in tree")]
    NoSuchLayer(usize),
    #[error("tree pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
