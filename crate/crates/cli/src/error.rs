use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible regime: {0}")]
    Infeasible(String),
    #[error("selftest failed: {}", .0.join(", "))]
    Selftest(Vec<String>),
    #[error(transparent)]
    Core(ebclab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ebclab::Error> for CliError {
    fn from(e: ebclab::Error) -> Self {
        match e {
            ebclab::Error::InfeasibleRegime(r) => CliError::Infeasible(r),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    /// 1 usage/config, 2 infeasible regime, 3 selftest failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::Selftest(_) => 3,
            _ => 1,
        }
    }
}
