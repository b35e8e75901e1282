use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function} has a pole at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("{function}({at}) overflows f64")]
    Overflow { function: &'static str, at: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature tolerance not met: estimate {estimate:e} with error {error:e}")]
    ToleranceNotMet { estimate: f64, error: f64 },

    #[error("divergent integral: kernel exponent {mu} <= -1")]
    DivergentIntegral { mu: f64 },

    #[error("function provides derivatives up to order {available}, order {required} is required")]
    InsufficientOrder { required: usize, available: usize },

    #[error("invalid order function: {0}")]
    InvalidOrder(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("singular assembly at t = {t}: pivot {pivot:e}")]
    SingularAssembly { t: f64, pivot: f64 },

    #[error("non-finite state at t = {t}")]
    Divergence { t: f64 },

    #[error("shooting failed after {iterations} Newton iterations (best residual {residual:e})")]
    ShootingFailed { iterations: usize, residual: f64 },

    #[error("shooting Jacobian is rank deficient")]
    RankDeficient,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
