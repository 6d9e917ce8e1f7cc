use qmetro_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::ResourceLimit { .. }
            | CoreError::Truncation { .. } => CliError::Param(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn param(msg: impl Into<String>) -> CliError {
    CliError::Param(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::from(CoreError::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::ResourceLimit { what: "w", requested: 12, cap: 10 }).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::DivergingPrecision).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::Numeric("nan".into())).exit_code(), 3);
    }
}
