//! Command implementations behind the `dsc-crypt` binary.

pub mod analyze;
pub mod config;
pub mod output;
pub mod suite;
pub mod sweep;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("resource cap: {0}")]
    ResourceCap(dsc_core::Error),
    #[error(transparent)]
    Core(dsc_core::Error),
    #[error("output: {0}")]
    Output(String),
}

impl From<dsc_core::Error> for HarnessError {
    fn from(e: dsc_core::Error) -> Self {
        match e {
            dsc_core::Error::ResourceCap { .. } => HarnessError::ResourceCap(e),
            other => HarnessError::Core(other),
        }
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::ResourceCap(_) => 3,
            HarnessError::Core(_) | HarnessError::Output(_) => 1,
        }
    }
}
