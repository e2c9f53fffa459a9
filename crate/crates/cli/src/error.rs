use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] extremogram::Error),

    #[error("{0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// 2 for bad input, 3 when the data cannot support the requested analysis.
    pub fn exit_code(&self) -> i32 {
        use extremogram::Error as E;
        match self {
            CliError::Core(
                E::NoExceedances { .. }
                | E::UnstableResample { .. }
                | E::FitDiverged { .. }
                | E::DegenerateThreshold,
            ) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
