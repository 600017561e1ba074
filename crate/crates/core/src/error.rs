use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("monopole strength k must be nonzero")]
    ZeroMonopole,
    #[error("deformation parameter m must be nonzero")]
    ZeroM,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} = {value} outside the working domain")]
    OutOfDomain { what: &'static str, value: f64 },
    #[error("operation requires gauge constant ell = {expected}, got {got}")]
    WrongGauge { expected: f64, got: f64 },
    #[error("S = E1 + k^2 m^2 = {0} is not positive")]
    NonpositiveS(f64),
    #[error("{0} leaves the real domain")]
    ComplexDomain(&'static str),
    #[error("m1 = {m1} and m2 = {m2} are not coprime positive integers")]
    NotCoprime { m1: u64, m2: u64 },
    #[error("Newton iteration did not converge (residual {residual:e} after {iterations} iterations)")]
    NewtonDiverged { residual: f64, iterations: usize },
    #[error("step left the domain window")]
    DomainExit,
    #[error("adaptive step size fell below {0:e}")]
    StepUnderflow(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
