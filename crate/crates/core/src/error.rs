use thiserror::Error;

/// Errors raised by graph construction, serialization and pattern handling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a graph needs at least one vertex")]
    NoVertices,
    #[error("{n} vertices exceeds the supported maximum of {max}")]
    TooManyVertices { n: usize, max: usize },
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("row {0} has bits at or above n")]
    StrayBits(usize),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("book bound b={b} outside [n/6, n/4] for n={n}")]
    BookOutOfRange { n: usize, b: usize },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
}

/// Errors raised while decoding graph6 text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Graph6Error {
    #[error("empty graph6 string")]
    Empty,
    #[error("invalid graph6 byte {byte:#04x} at offset {offset}")]
    InvalidByte { byte: u8, offset: usize },
    #[error("graph6 body has {got} bytes, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("graph6 size header is malformed")]
    BadHeader,
    #[error("non-canonical graph6 encoding: {0}")]
    NonCanonical(&'static str),
    #[error("graph6 encodes {0} vertices; only {max} are supported", max = crate::graph::MAX_VERTICES)]
    TooLarge(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Precondition failures of the part-vector calculus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("part vector entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("adjustment exceeded its step bound of {0}")]
    StepBound(usize),
}

/// Failures of the stability decomposition, naming the stage that failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("no qualifying first anchor triangle outside R0")]
    NoFirstAnchor,
    #[error("no qualifying second anchor triangle (x4 in W4, x5 and x6 in B)")]
    NoSecondAnchor,
    #[error("invalid stability parameters: {0}")]
    InvalidParams(String),
    #[error("decomposition does not match the graph: {0}")]
    Mismatch(String),
}

impl StructureError {
    /// Short stable name of the failed step, used in reports.
    pub fn step(&self) -> &'static str {
        match self {
            StructureError::NoFirstAnchor => "first_anchor",
            StructureError::NoSecondAnchor => "second_anchor",
            StructureError::InvalidParams(_) => "params",
            StructureError::Mismatch(_) => "input",
        }
    }
}

/// Range and configuration errors of the search drivers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("book bound b={b} outside the conjecture range [n/6, n/4) for n={n}")]
    BookOutOfRange { n: usize, b: usize },
    #[error("exhaustive mode supports n <= {max}, got {n}")]
    TooLargeForExhaustive { n: usize, max: usize },
    #[error("annealing supports 2 <= n <= 64, got {0}")]
    UnsupportedOrder(usize),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
