use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// The computation ran but a scientific check failed or the solver gave up.
    #[error("{context}: {source}")]
    Science {
        context: String,
        #[source]
        source: cmc_scri::Error,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for scientific failures, 2 for usage and configuration problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Science { .. } | CliError::CheckFailed(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) trait Context<T> {
    fn science(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for cmc_scri::Result<T> {
    fn science(self, context: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Science {
            context: context.to_string(),
            source,
        })
    }
}
