use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid channel{}{}: {reason}", fmt_index(" ", *channel), fmt_index(" row ", *row))]
    InvalidChannel {
        channel: Option<usize>,
        row: Option<usize>,
        reason: String,
    },

    #[error("infeasible rate for channel {channel}: rate {rate} is not below capacity {capacity}")]
    InfeasibleRate {
        channel: usize,
        rate: f64,
        capacity: f64,
    },

    #[error("degenerate channel {channel}: zero-rate exponent is 0, no control signaling possible")]
    DegenerateChannel { channel: usize },

    #[error("no convergence after {iterations} iterations; best bracket [{lower}, {upper}]")]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("session did not stop within {max_epochs} epochs")]
    Runaway { max_epochs: usize },
}

fn fmt_index(prefix: &str, index: Option<usize>) -> String {
    match index {
        Some(i) => format!("{prefix}{i}"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
