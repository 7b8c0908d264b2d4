use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid signature ({n}, {m}): both dimensions must be at least 1")]
    InvalidSignature { n: usize, m: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("the zero vector has no causal character")]
    ZeroVector,
    #[error("graph is not spacelike: max eigenvalue of Du Du^T is {max_eigenvalue}")]
    SpacelikeViolation { max_eigenvalue: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("operation requires {expected} boundary, domain has {found}")]
    WrongBoundary { expected: &'static str, found: String },
    #[error("dirichlet data missing")]
    MissingDirichletData,
    #[error("array length {found} does not match expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("point lies outside the sampled domain")]
    OutOfDomain,
    #[error("node {node} is not spacelike (max eigenvalue {max_eigenvalue})")]
    Spacelike { node: usize, max_eigenvalue: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("spacelike violation at node {node}, t = {t}: max eigenvalue {max_eigenvalue}")]
    SpacelikeViolation { node: usize, t: f64, max_eigenvalue: f64 },
    #[error("numerical blowup (non-finite value) at node {node}, t = {t}")]
    NumericalBlowup { node: usize, t: f64 },
    #[error("dirichlet data is not strictly acausal (delta = {delta})")]
    NotAcausal { delta: f64 },
    #[error("truncation discrepancies do not decrease: {discrepancies:?}")]
    TruncationNonConvergence { discrepancies: Vec<f64> },
    #[error("linear solver did not converge (residual {residual} after {iterations} iterations)")]
    LinearSolver { residual: f64, iterations: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("radius {r} outside barrier validity range (0, {max})")]
pub struct RangeError {
    pub r: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("check precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Range(#[from] RangeError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("config error: {0}")]
    Config(String),
    #[error("snapshot error: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("time {t} must be positive")]
pub struct TimeError {
    pub t: f64,
}
