use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("device {0} is out of range")]
    DeviceOutOfRange(usize),

    #[error("device {0} is protected and cannot seed an epidemic")]
    ProtectedSeed(usize),

    #[error("unknown firewall policy `{0}` (expected random, degree, random-dc or degree-dc)")]
    UnknownPolicy(String),

    #[error("unknown spanning rule `{0}` (expected both or either)")]
    UnknownSpanningRule(String),

    #[error("no result rows to estimate from")]
    EmptyRows,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
