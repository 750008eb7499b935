use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed graph text: {0}")]
    Malformed(String),

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),

    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("graph has no edges")]
    EmptyEdgeSet,

    #[error("graph has {got} nodes, above the limit of {limit}")]
    SizeLimit { limit: usize, got: usize },

    #[error("state space of {required} positions exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("no cop count up to {kmax} wins; raise the limit")]
    CopLimitExhausted { kmax: usize },

    #[error("capture time is infinite with {cops} cop(s)")]
    InfiniteCaptureTime { cops: usize },

    #[error("no forced capture within {horizon} rounds (capture time > {horizon})")]
    NoForcedCapture { horizon: usize },

    #[error("iteration did not converge within {iterations} sweeps")]
    NotConverged { iterations: usize },

    #[error("linear system is singular: some transient state never reaches capture")]
    SingularSystem,

    #[error("illegal cop move: {0}")]
    IllegalMove(String),

    #[error("unsupported family for closed forms: {0}")]
    UnsupportedFamily(String),

    #[error("malformed policy or schedule: {0}")]
    MalformedPolicy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
