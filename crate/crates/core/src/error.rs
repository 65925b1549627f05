//! Error types, one per module family.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge {source_vertex}->{target} has non-positive or non-finite weight {weight}")]
    BadWeight {
        source_vertex: usize,
        target: usize,
        weight: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("eigen iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("leading eigenpair requested for an empty matrix")]
    EmptyMatrix,
    #[error("basic set undefined: {attaining} blocks attain the spectral radius, or it is not the last one")]
    BasicSetPrecondition { attaining: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreedyError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("budget vector has length {got}, matrix has {expected} rows")]
    BudgetLength { expected: usize, got: usize },
    #[error("untouchable entry ({row}, {col}) is not an entry of A")]
    UntouchableOutsideRow { row: usize, col: usize },
    #[error("weight overlay does not match the sparsity pattern of A")]
    WeightPatternMismatch,
    #[error("starting matrix leaves the ball at row {row}")]
    InfeasibleStart { row: usize },
    #[error("spectral radius increased from {before} to {after}")]
    RhoIncreased { before: f64, after: f64 },
    #[error("internal invariant violated: {0}")]
    InvariantBreach(&'static str),
    #[error("relaxation exceeded {0} eigenvector computations")]
    StepLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Greedy(#[from] GreedyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("graph has {n} vertices, oracle cap is {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("enumeration of {size} candidates exceeds cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(&'static str),
}
