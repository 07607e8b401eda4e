use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] collres::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("cannot plot {0}: no finite data")]
    EmptyPlot(&'static str),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(collres::Error::Invalid(_)) => "validation",
            CliError::Model(collres::Error::Convergence { .. }) => "convergence",
            CliError::Model(collres::Error::Config(_) | collres::Error::Json(_)) => "config",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "config",
            CliError::EmptyPlot(_) => "plot",
            CliError::Usage(_) => "usage",
            CliError::Pool(_) => "runtime",
        }
    }

    /// One-line JSON form written to stderr on failure.
    pub fn structured(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Report { error: self.kind(), message: self.to_string() })
            .expect("error report serializes")
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
