use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Core(#[from] lincmdp::Error),

    /// `code` is the most severe exit code among the failed seeds.
    #[error("{failed} of {total} seeds failed")]
    SeedsFailed { failed: usize, total: usize, code: i32 },
}

impl HarnessError {
    /// 1 config error, 2 runtime assert, 3 infeasible instance.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if is_infeasible(e) => 3,
            HarnessError::Core(e) if e.is_runtime_assert() => 2,
            HarnessError::SeedsFailed { code, .. } => *code,
            _ => 1,
        }
    }
}

fn is_infeasible(e: &lincmdp::Error) -> bool {
    match e {
        lincmdp::Error::Infeasible { .. } => true,
        lincmdp::Error::AtEpisode { source, .. } => is_infeasible(source),
        _ => false,
    }
}
