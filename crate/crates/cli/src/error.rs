use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, #[source] std::io::Error),
    #[error("matrix file {path}: {message}", path = .0.display(), message = .1)]
    Matrix(PathBuf, String),
    #[error(transparent)]
    Stability(#[from] fbplab::stability::StabilityError),
    #[error(transparent)]
    Interface(#[from] fbplab::interface::InterfaceError),
    #[error(transparent)]
    Solver(#[from] fbplab::solver::SolverError),
    #[error("{0}")]
    Unsupported(String),
}
