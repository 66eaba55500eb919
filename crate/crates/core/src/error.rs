use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate state vector: all components are zero")]
    DegenerateStateVector,

    #[error("invalid state vector component {index}: {value}")]
    InvalidComponent { index: usize, value: f64 },

    #[error("feature annihilates state vector")]
    Annihilated,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("protein {protein} has no bin assignment for feature {feature}")]
    MissingAssignment { protein: String, feature: String },

    #[error("no feature-table entry for feature {feature} bin {bin}")]
    MissingTableEntry { feature: String, bin: usize },

    #[error("unknown feature {0}")]
    UnknownFeature(String),

    #[error("unknown protein {0}")]
    UnknownProtein(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged")]
    Diverged,

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("no labeled proteins in the evaluated subsets")]
    NoLabeledProteins,

    #[error("subset {0} has no labeled proteins")]
    MissingFold(u8),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
