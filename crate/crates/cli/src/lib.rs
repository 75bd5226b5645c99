//! Library side of the `coherent` command: argument layering, the four
//! subcommands and table serialization. `main.rs` only parses arguments,
//! prints and maps errors to exit codes.

pub mod commands;
pub mod config;
pub mod table;

use std::fmt;

use coherent_core::Error;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Error that ends a run; printed as one JSON line on standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: "usage", message: message.into(), exit_code: EXIT_USAGE }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { kind: "io", message: message.into(), exit_code: EXIT_IO }
    }

    /// The single-line record written to standard error.
    pub fn record(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::TailNotConverged { .. } => {
                Self { kind: "no_convergence", message: e.to_string(), exit_code: EXIT_NO_CONVERGENCE }
            }
            other => Self { kind: "invalid_query", message: other.to_string(), exit_code: EXIT_USAGE },
        }
    }
}

/// Bytes to emit plus the exit status they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: Vec<u8>,
    pub exit_code: i32,
}
