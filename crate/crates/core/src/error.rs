use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("polynomial degree {0} is not supported (need k >= 4)")]
    InvalidDegree(usize),
    #[error("degree-of-freedom matrix is numerically singular (rcond = {rcond:e})")]
    SingularDofMatrix { rcond: f64 },
    #[error("space dimension {dim} does not match degree-of-freedom count {n_dof}")]
    MismatchedCounts { dim: usize, n_dof: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("system matrix is not symmetric positive definite")]
    NotSpd,
    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("report parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<FemError>,
    },
}

pub type Result<T> = std::result::Result<T, FemError>;
