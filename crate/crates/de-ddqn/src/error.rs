use std::io;
use std::path::PathBuf;

use de_ddqn_core::bench::BenchError;
use de_ddqn_core::ddqn::DdqnError;
use de_ddqn_core::de::DeError;
use de_ddqn_core::episode::EpisodeError;
use de_ddqn_core::neural::codec::CodecError;
use de_ddqn_core::neural::NeuralError;
use de_ddqn_core::rewards::RewardError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    ConfigLine {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Checkpoint {
        path: PathBuf,
        #[source]
        source: CodecError,
    },
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    De(#[from] DeError),
    #[error(transparent)]
    Agent(#[from] DdqnError),
    #[error(transparent)]
    Network(#[from] NeuralError),
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration and data problems, 3 for
    /// failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::ConfigLine { .. }
            | Error::Config(_)
            | Error::Data { .. }
            | Error::Checkpoint { .. }
            | Error::Bench(_)
            | Error::Reward(_) => 2,
            Error::Episode(_) | Error::De(_) | Error::Agent(_) | Error::Network(_) | Error::Runtime(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
