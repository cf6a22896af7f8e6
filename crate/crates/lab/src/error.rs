use drinfeld_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },
}

impl LabError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn core(context: impl Into<String>, source: Error) -> Self {
        LabError::Core {
            context: context.into(),
            source,
        }
    }

    /// 3 for invariant violations, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core {
                source: Error::InvariantViolation(_),
                ..
            } => 3,
            _ => 2,
        }
    }
}
