use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("depth cap of {cap} layers exceeded (requested {requested})")]
    DepthCap { cap: usize, requested: usize },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("optimizer stalled: {0}")]
    Stall(String),
    #[error("not a nearest-neighbour matchgate circuit: {0}")]
    Classification(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
