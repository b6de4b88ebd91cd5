use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("degenerate operator: (q-1)x+omega is the zero polynomial")]
    DegenerateOperator,
    #[error("polynomial division leaves a nonzero remainder")]
    NotDivisible,
    #[error("horizon exceeded: need moment index {needed}, horizon is {horizon}")]
    HorizonExceeded { needed: usize, horizon: usize },
    #[error("singular Pearson recurrence at equation {step}")]
    SingularRecurrence { step: usize },
    #[error("wrong number of free moments: expected {expected}, got {got}")]
    WrongFreeCount { expected: usize, got: usize },
    #[error("functional is not quasi-definite at n = {n}")]
    NotQuasiDefinite { n: usize },
    #[error("basis is not graded monic at index {index}")]
    BasisNotGradedMonic { index: usize },
    #[error("two distinct pairs attain the minimal class {class}")]
    NonUniqueMinimalPair { class: usize },
    #[error("no Pearson pair found")]
    NoPearsonPair,
    #[error("Pearson equation violated at moment {n}")]
    PearsonViolated { n: usize },
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("recurrence breakdown at n = {n}")]
    RecurrenceBreakdown { n: usize },
    #[error("defining relation fails at n = {n}")]
    DefiningRelationFailed { n: usize },
    #[error("wrong degree: expected {expected}, got {got}")]
    WrongDegree { expected: usize, got: i64 },
    #[error("q-bracket [{n}] vanishes")]
    DegenerateBracket { n: usize },
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}
