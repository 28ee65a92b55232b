use thiserror::Error;

/// Errors raised by the command layer. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A configuration failed validation; names the violated invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run '{label}' diverged at iteration {iter}: {reason}")]
    Diverged { label: String, iter: usize, reason: String },

    #[error(transparent)]
    Core(#[from] rsgd::Error),

    #[error("cannot parse {path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 for validation failures, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigParse { .. } => 2,
            CliError::Core(
                rsgd::Error::InvalidArgument(_)
                | rsgd::Error::DimensionMismatch { .. }
                | rsgd::Error::InfeasibleBudget(_),
            ) => 2,
            CliError::Diverged { .. } | CliError::Core(rsgd::Error::Diverged { .. }) => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}
