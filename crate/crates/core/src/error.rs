use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid wave packet: {0}")]
    InvalidPacket(String),

    #[error("invalid modulation: {0}")]
    InvalidModulation(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("position {x} is not a node of the sampled potential grid")]
    OffGrid { x: f64 },

    #[error("invalid propagation plan: {0}")]
    InvalidPlan(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("zero-norm state: {0}")]
    ZeroNorm(&'static str),

    #[error("incommensurate modulation: tone frequencies are not integer multiples of one base frequency")]
    Incommensurate,

    #[error("threshold channel m={m} has zero frequency")]
    ThresholdChannel { m: i32 },

    #[error("invalid channel set: {0}")]
    InvalidChannels(String),

    #[error("singular scattering system (pivot {pivot:e} at row {row}); incident energy sits on a resonance at solver precision")]
    Singular { row: usize, pivot: f64 },

    #[error("scattering solve did not converge: residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
