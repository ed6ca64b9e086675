use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] topophase::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(topophase::Error::Tolerance { .. } | topophase::Error::NotConverged { .. }) => 3,
            _ => 2,
        }
    }
}

pub fn missing(flag: &str, what: &str) -> CliError {
    CliError::Usage(format!("{what} needs --{flag}"))
}
