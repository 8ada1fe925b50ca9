use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] rhymegan_core::Error),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("vocabulary hash mismatch: checkpoint has {found}, expected {expected}")]
    VocabMismatch { expected: String, found: String },
    #[error("character inventory hash mismatch: checkpoint has {found}, expected {expected}")]
    InventoryMismatch { expected: String, found: String },
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

pub(crate) fn format_err(path: impl Into<PathBuf>, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.into(),
        message: message.into(),
    }
}
