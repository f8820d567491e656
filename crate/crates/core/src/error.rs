use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,

    #[error("vector contains a non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("malformed embedding store: {0}")]
    Format(String),

    #[error("duplicate id in store: {0:?}")]
    DuplicateId(String),

    #[error("invalid id: {0}")]
    InvalidId(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid descriptor phrase {phrase:?}: {reason}")]
    InvalidPhrase { phrase: String, reason: &'static str },

    #[error("no descriptors could be parsed from the completion")]
    EmptyParse,

    #[error("category {0:?} has no descriptors")]
    EmptyDictionary(String),

    #[error("descriptor index {index} out of range for {len} descriptors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate descriptor phrase {0:?}")]
    DuplicatePhrase(String),

    #[error("cannot remove the last descriptor of {0:?}")]
    LastDescriptor(String),

    #[error("invalid dictionary file: {0}")]
    Dictionary(String),

    #[error("LLM provider error: {0}")]
    Provider(String),

    #[error("missing embeddings for {} text(s): {}", .0.len(), .0.join(" | "))]
    MissingEmbedding(Vec<String>),

    #[error("unknown image {0:?}")]
    UnknownImage(String),

    #[error("unknown category {0:?}")]
    UnknownCategory(String),

    #[error("unknown subgroup {0:?}")]
    UnknownSubgroup(String),

    #[error("manifest is empty")]
    EmptyManifest,

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("relevant set is empty")]
    EmptyRelevantSet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Writes through a sibling temp file and renames it into place.
pub(crate) fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    let mut file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
