use thiserror::Error;

/// Failures raised by the core numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),
    #[error("landscape evaluated outside its domain (q + omega0^2 = {0})")]
    DomainError(f64),
    #[error("point is not superradiant (boundary residual {0})")]
    NotSuperradiant(f64),
    #[error("nonlinear solver did not converge (residual {0})")]
    NoConvergence(f64),
    #[error("unphysical Holstein-Primakoff state (k = {0})")]
    UnphysicalState(f64),
    #[error("eigensolver failed to converge")]
    EigensolverFailure,
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("constraint drift {drift} exceeded limit at t = {t}")]
    ConstraintDriftExceeded { t: f64, drift: f64 },
    #[error("both couplings vanish; the dark state is undefined")]
    BothCouplingsZero,
    #[error("trajectory did not settle to a fixed point")]
    NotConverged,
    #[error("Raman channels imply different mixing angles ({0} vs {1})")]
    InconsistentRaman(f64, f64),
    #[error("Raman detuning is zero")]
    ZeroDetuning,
    #[error("malformed parameter text: {0}")]
    Parse(alloc::string::String),
}

pub type Result<T> = core::result::Result<T, Error>;
