use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: triwave_core::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("nothing to emit")]
    EmptyTable,
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

impl RunError {
    pub fn model(context: impl Into<String>) -> impl FnOnce(triwave_core::Error) -> RunError {
        let context = context.into();
        move |source| RunError::Model { context, source }
    }

    /// 2 for numerical failures, 1 for everything the user can fix in the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Model { source, .. } if source.is_numerical() => 2,
            _ => 1,
        }
    }
}
