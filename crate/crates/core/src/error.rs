use thiserror::Error;

/// Broad failure classes. The CLI maps each one to a distinct exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input violates a precondition or model invariant.
    Domain,
    /// A file could not be read, written or parsed.
    Io,
    /// A configured enumeration or size cap was exceeded.
    Resource,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {node} outside 1..={n_nodes}")]
    InvalidNode { node: usize, n_nodes: usize },

    #[error("invalid network spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("invalid delay profile: {0}")]
    InvalidProfile(String),

    #[error("delay profile {0} is not feasible for this network")]
    InfeasibleProfile(String),

    #[error("operation requires the positive (all-one) delay profile, got {0}")]
    NotPositiveDelay(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvent,

    #[error("{what} = {value} is out of range ({expected})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a probability distribution: {0}")]
    NotStochastic(String),

    #[error("cut-set enumeration needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("grid has {points} distributions, above the cap of {cap}")]
    GridTooLarge { points: u128, cap: u128 },

    #[error("state space has {size} entries, above the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("codebook has {size} codewords, above the cap of {cap}")]
    CodebookTooLarge { size: u128, cap: u128 },

    #[error("rate {rate} is not below the forward capacity {capacity}")]
    RateAboveCapacity { rate: f64, capacity: f64 },

    #[error("malformed code description: {0}")]
    InvalidCode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Json(_) => ErrorClass::Io,
            Error::GridTooLarge { .. }
            | Error::StateSpaceTooLarge { .. }
            | Error::CodebookTooLarge { .. } => ErrorClass::Resource,
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
