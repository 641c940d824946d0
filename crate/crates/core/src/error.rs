use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}`: {reason}")]
    InvalidLength { edge: String, reason: String },
    #[error("graph is disconnected: vertex `{0}` is unreachable")]
    Disconnected(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("offset {offset} is outside edge `{edge}` of length {length}")]
    OffsetOutOfRange {
        edge: String,
        offset: String,
        length: String,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("function is discontinuous at vertex `{0}`")]
    Discontinuous(String),
    #[error("function has a non-integer slope on edge `{0}`")]
    NonIntegerSlope(String),
    #[error("malformed function on edge `{0}`: {1}")]
    MalformedFunction(String, String),
    #[error("objects live on different graphs")]
    GraphMismatch,
    #[error("divisor has a negative coefficient at `{0}` away from the base point")]
    NegativeOutsideBase(String),
    #[error("divisor is not reduced with respect to `{0}`")]
    NotReduced(String),
    #[error("the complete linear system is empty (rank -1)")]
    EmptyLinearSystem,
    #[error("operation needs genus at least 2, graph has genus {0}")]
    GenusTooSmall(usize),
    #[error("curve has a point of degree one at `{0}`")]
    HasLeaves(String),
    #[error("`{0}` is not a boundary point of the cut")]
    NotOnBoundary(String),
    #[error("oracle infeasible: subdivided graph needs {nodes} nodes, budget is {budget}")]
    OracleInfeasible { nodes: usize, budget: usize },
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
