use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource cap: {0}")]
    Cap(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) | CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl From<cuntz_core::Error> for CliError {
    fn from(e: cuntz_core::Error) -> Self {
        use cuntz_core::Error as E;
        match e {
            E::Cap { .. } => CliError::Cap(e.to_string()),
            E::Alphabet(_) | E::Letter { .. } | E::Grade { .. } | E::UnknownOperator(_) | E::NonPositiveT(_) | E::Boundary(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Other(e.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}
