use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature grid cannot resolve {what}: needs {needed}, grid provides {available}")]
    Resolution {
        what: String,
        needed: usize,
        available: usize,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("integration exceeded {steps} steps at t = {t}")]
    TooManySteps { steps: usize, t: f64 },

    #[error("tolerance not met: step-halving check differs by {deviation:e} (allowed {allowed:e})")]
    ToleranceNotMet { deviation: f64, allowed: f64 },

    #[error("resonant forcing: sigma^2 = {sigma2} equals mu^2 = {mu2}")]
    Resonance { sigma2: f64, mu2: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mode ({j},{n}) component {component}: {source}")]
    Mode {
        j: u32,
        n: u32,
        component: u8,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown scenario '{0}' (expected ex1, ex2, regular or inhomogeneous)")]
    UnknownScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("net failed: {failed} of {total} regularised solves failed (first: {first})")]
    NetFailed {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
