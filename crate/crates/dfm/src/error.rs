use thiserror::Error;

/// Errors produced by model construction, sampling, fitting and I/O.
#[derive(Debug, Error)]
pub enum DfmError {
    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("invalid membership matrix: {0}")]
    InvalidMembership(String),

    #[error("invalid connectivity matrix: {0}")]
    InvalidConnectivity(String),

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("distribution domain violation at entry ({i},{j}): value {value} not admissible for {dist}")]
    Domain {
        /// 1-based row index of the offending entry.
        i: usize,
        /// 1-based column index of the offending entry.
        j: usize,
        value: f64,
        dist: String,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("eigendecomposition failed to converge")]
    EigenConvergence,

    #[error("degenerate clustering input: {0}")]
    Degenerate(String),

    #[error("GML syntax error at line {line}: {msg}")]
    GmlSyntax { line: usize, msg: String },

    #[error("GML error: {0}")]
    Gml(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
