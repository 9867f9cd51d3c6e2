use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An evaluation landed on a singular point. `variable` names the
    /// parameter whose value hit the pole (`z`, `c`, `nu`, `tau`, `K`).
    #[error("pole at {variable} = {}", fmt_complex(.location))]
    Pole {
        variable: &'static str,
        location: Complex64,
    },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("tolerance {requested:e} not met (error estimate {achieved:e})")]
    Tolerance { requested: f64, achieved: f64 },
}

impl Error {
    pub(crate) fn pole(variable: &'static str, location: Complex64) -> Self {
        Error::Pole { variable, location }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Compact rendering used in error messages: real values print without an
/// imaginary part.
pub fn fmt_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}
