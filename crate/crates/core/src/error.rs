use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error(
        "steady state is multistable ({branches} branches) but a monostable point was required"
    )]
    Bistable { branches: usize },

    #[error("response matrix is singular at omega = {omega} rad/s")]
    Singular { omega: f64 },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("phase-space bound violated: max|alpha| = {max_abs} exceeds {bound}")]
    BoundViolation { max_abs: f64, bound: f64 },

    #[error("integrator failure: {0}")]
    Integrator(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        field,
        reason: reason.into(),
    }
}
