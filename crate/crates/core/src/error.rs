use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular phase point: {0}")]
    SingularPoint(String),
    #[error("metric numerically singular (condition estimate {cond:.3e})")]
    SingularMetric { cond: f64 },
    #[error("Fock truncation insufficient: tail estimate {tail:.3e} at cutoff {cutoff}")]
    TruncationInsufficient { cutoff: usize, tail: f64 },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator index out of range in `{0}`")]
    IndexOutOfRange(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("integrator step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("boundary-value Jacobian singular (condition {cond:.3e})")]
    SingularJacobian { cond: f64 },
    #[error("focal point: |det M22| = {det:.3e} at t = {t}")]
    FocalPoint { t: f64, det: f64 },
    #[error("metric square root branch failure at t = {t}")]
    SqrtBranchFailure { t: f64 },
    #[error("Riccati solution blew up at t = {t}")]
    RiccatiBlowup { t: f64 },
    #[error("no trajectory contributions to assemble")]
    EmptyContributionSet,
    #[error("stepped propagation did not converge after {steps} steps (last change {change:.3e})")]
    NonConvergentStepping { steps: usize, change: f64 },
    #[error("Schwinger mapping mismatch: {0}")]
    MappingMismatch(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
