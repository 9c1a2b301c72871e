use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value at index {index} is not a spin ({value}); expected +1 or -1")]
    NonSpin { index: usize, value: i64 },

    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-coupling ({0},{0}) is not allowed")]
    SelfCoupling(usize),

    #[error("{n} spins exceeds the exhaustive-search cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("clique size {n} must be a positive multiple of the shore size {shore}")]
    CliqueSizeUnsupported { n: usize, shore: usize },

    #[error(
        "embedding needs a {need_rows}x{need_cols} cell block at ({row},{col}) \
         but the graph is {rows}x{cols}"
    )]
    GraphTooSmall {
        need_rows: usize,
        need_cols: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("sample mentions qubit {qubit} which is not in the embedding")]
    UnknownQubit { qubit: u32 },

    #[error("fault probability {value} at chain {chain} position {position} is outside [0,1]")]
    FaultProbabilityRange {
        chain: usize,
        position: usize,
        value: f64,
    },

    #[error("fault profile covers {actual} positions for chain {chain}, expected {expected}")]
    ProfileShapeMismatch {
        chain: usize,
        expected: usize,
        actual: usize,
    },

    #[error("weighted decoding requires a fault profile")]
    MissingProfile,

    #[error("no broken samples to estimate a fault profile from")]
    NoBrokenSamples,

    #[error("empty sample set")]
    EmptySamples,

    #[error("empty problem set")]
    EmptyProblems,

    #[error("malformed {kind} file {path}: {message}")]
    Malformed {
        kind: &'static str,
        path: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
