//! File formats, seeded scenarios and the batch runner behind the
//! `lipideal` binary.

pub mod formats;
pub mod run;
pub mod scenario;

use serde::Serialize;

pub use run::{execute, run, Command, Format, RunConfig};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] lipideal_core::Error),
    #[error("io error: {0}")]
    Io(String),
}

impl LabError {
    /// 2 for bad input, 1 for failures of the mathematics itself.
    pub fn exit_code(&self) -> i32 {
        use lipideal_core::Error as E;
        match self {
            LabError::Input(_) | LabError::Io(_) => 2,
            LabError::Core(e) => match e {
                E::Dimension { .. }
                | E::NotSquare { .. }
                | E::Parameter { .. }
                | E::InvalidMetric(_)
                | E::BaseValue(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "input",
            _ => "check",
        }
    }
}

/// One named pass/fail check with a short detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub result: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub command: String,
    pub pass: bool,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}
