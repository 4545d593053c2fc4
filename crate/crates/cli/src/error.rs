use fracdim_core::Error as CoreError;

/// CLI failure with its process exit code.
///
/// Codes: 2 validation, 3 solver/overflow, 4 I/O, 5 stopping-set cap,
/// 6 frontier cap.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match &err {
            CoreError::SetTooLarge { .. } => 5,
            CoreError::FrontierTooLarge { .. } => 6,
            CoreError::NoConvergence { .. }
            | CoreError::CountOverflow { .. }
            | CoreError::Inconsistent { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
