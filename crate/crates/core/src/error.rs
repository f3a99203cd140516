use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read or write {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: expected {expected} values, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {token:?} as a number")]
    BadToken {
        row: usize,
        column: usize,
        token: String,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("matrix has no rows or no columns")]
    EmptyMatrix,

    #[error("requested {rows}x{cols} submatrix exceeds source {m}x{n}")]
    DimensionsExceedSource {
        rows: usize,
        cols: usize,
        m: usize,
        n: usize,
    },

    #[error("density must lie in (0, 1], got {0}")]
    DensityOutOfRange(f64),

    #[error("no observed training cells")]
    EmptyTraining,

    #[error("test mask is empty (density {density} leaves nothing to evaluate)")]
    EmptyTest { density: f64 },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparams(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch} (learning rate {alpha}): loss is not finite")]
    Divergence { epoch: usize, alpha: f64 },

    #[error(
        "unknown method {0:?}; known methods: umean, imean, upcc, ipcc, wsrec, biassvd, 2rhyrec"
    )]
    UnknownMethod(String),

    #[error(
        "method {0:?} is not implemented (its algorithm is defined outside this model family)"
    )]
    MethodNotImplemented(String),

    #[error("unknown sweep parameter {0:?}; expected one of topK, beta, F, topk_neighbors")]
    UnknownParameter(String),

    #[error("no user has at least {k} test entries, so NDCG-{k} is undefined")]
    NoQualifyingUsers { k: usize },

    #[error("relevance transform produced zero ideal gain but non-zero ranked gain")]
    InconsistentRelevance,

    #[error("negative QoS value {0} cannot be used as a larger-is-better relevance")]
    NegativeRelevance(f64),

    #[error("length mismatch: {left} predictions vs {right} ground-truth values")]
    LengthMismatch { left: usize, right: usize },

    #[error("cannot compute an error metric over an empty list")]
    EmptyList,

    #[error("k must be at least 1")]
    ZeroK,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
