use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("constraint `{constraint}` references undeclared variable #{var}")]
    UnknownVariable { constraint: String, var: usize },
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
}

#[derive(Debug, Error)]
pub enum LpFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown variable `{0}` in solution listing")]
    UnknownVariable(String),
    #[error("solution listing has no status header")]
    MissingStatus,
    #[error("unrecognised solver status `{0}`")]
    BadStatus(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("external solver: {0}")]
    External(String),
    #[error(transparent)]
    LpFile(#[from] LpFileError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
