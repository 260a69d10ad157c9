use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}:{line}: key '{key}': {message}")]
    Config { file: String, line: usize, key: String, message: String },

    #[error("--{flag}: {message}")]
    Flag { flag: String, message: String },

    #[error("environment variable {var}: {message}")]
    Env { var: &'static str, message: String },

    #[error("invalid configuration: {0}")]
    Invalid(qka_core::QkaError),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("simulation failed: {0}")]
    Simulation(qka_core::QkaError),
}

impl CliError {
    /// Configuration problems exit with 2, everything else with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Simulation(_) => 1,
            _ => 2,
        }
    }
}
