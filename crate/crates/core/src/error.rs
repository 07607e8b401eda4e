use std::fmt;

use thiserror::Error;

/// One violated invariant reported by [`crate::PairSystem::validate`] and friends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { field: field.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} evaluated {distance:e} away from its pole")]
    PoleHit { what: &'static str, distance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (error estimate {error_estimate:e}, target {target:e})"
    )]
    Convergence { subdivisions: usize, error_estimate: f64, target: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
