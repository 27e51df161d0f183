use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("non-finite evaluation at node {node}: {what}")]
    Evaluation { node: usize, what: String },

    #[error("problem does not supply analytic derivatives")]
    MissingDerivatives,

    #[error("singular linear system (Newton iteration {iteration}, pivot column {column})")]
    Singular { iteration: usize, column: usize },

    #[error("unknown report quantity `{0}`")]
    UnknownQuantity(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
