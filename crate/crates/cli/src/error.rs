use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] hssm::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration, input and parameter problems; 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(hssm::Error::Numerical(_)) => 3,
            _ => 2,
        }
    }
}

/// Prefixes a parameter or size error with the config key it came from.
pub fn at<T>(key: &str, r: hssm::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        hssm::Error::Numerical(m) => CliError::Core(hssm::Error::Numerical(format!("{key}: {m}"))),
        other => CliError::Config(format!("{key}: {other}")),
    })
}
