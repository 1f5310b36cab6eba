use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
///
/// The CLI maps `Config` and `Domain` to exit code 1 and everything else to 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("step size underflow at r = {r:.6e} (h = {h:.3e})")]
    StepUnderflow { r: f64, h: f64 },

    #[error("integration diverged at r = {r:.6e}: magnitude {magnitude:.3e} exceeds guard")]
    Divergence { r: f64, magnitude: f64 },

    #[error("Picard iteration stopped contracting after {iterations} steps (delta ratio {ratio:.3})")]
    Contraction { iterations: usize, ratio: f64 },

    #[error("{parameter} = {value:.6e} left the relaxed box [{lo:.6e}, {hi:.6e}]; try continuation from a larger σ")]
    OutOfBox { parameter: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("iteration did not converge in {iterations} steps (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
