use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("oracle fault at {vertex}: {reason}")]
    OracleFault { vertex: VertexId, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("end metadata inconsistent with the graph: {0}")]
    Metadata(String),

    /// Non-fatal: the computation ran out of truncation. `achieved` counts how
    /// far it got; `suggested` is a horizon estimate that should suffice.
    #[error("needs a larger horizon for {what} (achieved {achieved}{})", suggested.map(|h| format!(", try horizon {h}")).unwrap_or_default())]
    NeedsLargerHorizon {
        what: String,
        achieved: usize,
        suggested: Option<usize>,
    },

    #[error("ray prefix too short: {0}")]
    NeedsLongerPrefix(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("not a ray: {0}")]
    NotARay(String),

    #[error("not a double ray: {0}")]
    NotADoubleRay(String),

    #[error("lefty normalization fault: {0}")]
    LeftyFault(String),
}

impl Error {
    pub fn horizon(what: impl Into<String>, achieved: usize, suggested: Option<usize>) -> Self {
        Error::NeedsLargerHorizon {
            what: what.into(),
            achieved,
            suggested,
        }
    }

    pub fn is_horizon(&self) -> bool {
        matches!(self, Error::NeedsLargerHorizon { .. })
    }

    /// Stable short name used in JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OracleFault { .. } => "oracle-fault",
            Error::Input(_) => "input",
            Error::UnknownInstance(_) => "unknown-instance",
            Error::Metadata(_) => "metadata-inconsistency",
            Error::NeedsLargerHorizon { .. } => "needs-larger-horizon",
            Error::NeedsLongerPrefix(_) => "needs-longer-prefix",
            Error::Unsupported(_) => "unsupported-case",
            Error::NotARay(_) => "not-a-ray",
            Error::NotADoubleRay(_) => "not-a-double-ray",
            Error::LeftyFault(_) => "lefty-fault",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
