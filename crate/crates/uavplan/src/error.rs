use std::fmt;

use serde::Serialize;
use uavplan_core::Error;

/// Process exit status of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    Internal,
    Input,
    ResourceLimit,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Internal => 1,
            ExitKind::Input => 2,
            ExitKind::ResourceLimit => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { kind: ExitKind::Input, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { kind: ExitKind::Internal, message: message.into() }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": self.kind,
            "exit_code": self.kind.code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidArgument(_)
            | Error::InvalidInstance(_)
            | Error::InvalidTree(_)
            | Error::EnumerationCap { .. }
            | Error::Infeasible(_) => ExitKind::Input,
            Error::NodeLimit(_) => ExitKind::ResourceLimit,
            Error::MalformedModel(_) | Error::Internal(_) => ExitKind::Internal,
        };
        Self { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::internal(format!("i/o: {e}"))
    }
}
