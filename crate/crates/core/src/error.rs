use thiserror::Error;

/// Errors produced by the fake Brownian motion library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An interval list failed validation.
    #[error("invalid interval system at index {index}: {reason}")]
    InvalidInterval { index: usize, reason: String },

    /// The lattice spacing is too coarse to place a point inside a gap.
    #[error("m = {m} too small: gap ({lo}, {hi}) contains no lattice point")]
    LatticeTooCoarse { m: u32, lo: f64, hi: f64 },

    /// The occupation clock of a finite path never exceeds the requested time.
    #[error("clock exhausted: requested time {requested} but the clock only reaches {available}; extend t_max")]
    ClockExhausted { requested: f64, available: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
