use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("degenerate quadruple: points {0} and {1} coincide")]
    DegenerateQuadruple(usize, usize),
    #[error("operation requires a Schottky set on the whole sphere")]
    NotWholeSphere,
    #[error("point is not in the Schottky set: {0}")]
    NotInSet(String),
    #[error("no connecting circle arc inside the ambient ball")]
    NoArcInAmbient,
    #[error("candidate sphere is not contained in the Schottky set")]
    NotContained,
    #[error("word is not reduced at position {0}")]
    NotReduced(usize),
    #[error("index {index} out of range for {len} caps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("sample left the domain of the map at radius {0}")]
    DomainEscape(f64),
    #[error("ill-conditioned point pairs: {0}")]
    IllConditioned(String),
    #[error("singular Jacobian (smallest singular value {0:e})")]
    SingularJacobian(f64),
    #[error("construction step {0} produced an empty net")]
    EmptyNet(usize),
    #[error("pole encountered while evaluating word at position {0}")]
    PoleEncountered(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
