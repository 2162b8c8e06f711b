use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range. `constraint` names the
    /// violated inequality.
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    /// The spectral measure annihilates some direction.
    #[error("degenerate spectral measure: direction {witness:?} has g = {value:e}")]
    Degenerate { witness: Vec<f64>, value: f64 },

    /// Adaptive quadrature did not reach its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    /// A frequency block or drift level is not resolvable on the grid.
    #[error("not representable on grid: {0}")]
    NotRepresentable(String),

    /// The Fourier cutoff is too small for the requested time.
    #[error("frequency cutoff {cutoff} too small; at least {required} required")]
    Truncation { cutoff: f64, required: f64 },

    /// A simulated path left the finite floating-point range.
    #[error("path {path} aborted at t = {time}: non-finite state")]
    PathAborted { path: usize, time: f64 },

    /// A simulation level failed; `n` is its number of steps per unit time.
    #[error("simulation with n = {n} failed: {source}")]
    Simulation {
        n: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }
}

/// Returns `Err(InvalidParameter)` unless `cond` holds.
pub(crate) fn ensure(cond: bool, name: &'static str, constraint: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(name, constraint()))
    }
}
