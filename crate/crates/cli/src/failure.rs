use std::fmt;

use serde::{Deserialize, Serialize};

/// A command failure as reported on standard error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    #[serde(rename = "error")]
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
        }
    }

    /// Single-line JSON object.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("two strings always serialize")
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for Failure {}

impl From<logme_core::Error> for Failure {
    fn from(e: logme_core::Error) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        logme_core::Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        logme_core::Error::from(e).into()
    }
}

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some items failed; the rest were written.
    Partial,
}

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_PARTIAL: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => EXIT_SUCCESS,
            Outcome::Partial => EXIT_PARTIAL,
        }
    }
}
