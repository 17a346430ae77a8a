use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error(transparent)]
    Core(#[from] multireg_core::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("solver failures {failures}/{attempts} exceed the budget of {budget}")]
    FailureBudget {
        failures: usize,
        attempts: usize,
        budget: f64,
    },
}

impl ExpError {
    /// Process exit code: 2 for configuration problems, 3 for an exceeded
    /// solver-failure budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) | ExpError::Json(_) => 2,
            ExpError::Core(e) => match e {
                multireg_core::Error::Parse(_)
                | multireg_core::Error::InvalidModel(_)
                | multireg_core::Error::InvalidRegularizer(_)
                | multireg_core::Error::InvalidArgument(_)
                | multireg_core::Error::InvalidBipartition { .. }
                | multireg_core::Error::InvalidShape(_) => 2,
                _ => 1,
            },
            ExpError::FailureBudget { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExpError>;
