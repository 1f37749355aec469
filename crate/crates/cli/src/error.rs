use std::path::Path;

use kar_core::autodiff::AutodiffError;
use kar_core::dataeval::DataError;
use kar_core::enrich::{EnrichError, FileError};
use kar_core::lexdb::LexiconError;
use kar_core::model::ModelError;
use thiserror::Error;

/// Command failures, grouped into classes with stable exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("consistency: {0}")]
    Consistency(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Parse(_) => 4,
            CliError::Consistency(_) => 5,
            CliError::Checkpoint(_) => 6,
        }
    }

    /// The message without the class prefix.
    pub fn detail(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Io(m)
            | CliError::Parse(m)
            | CliError::Consistency(m)
            | CliError::Checkpoint(m)
            | CliError::Other(m) => m,
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(self, path: &Path) -> Self {
        let wrap = |m: String| format!("{}: {m}", path.display());
        match self {
            CliError::Config(m) => CliError::Config(wrap(m)),
            CliError::Io(m) => CliError::Io(wrap(m)),
            CliError::Parse(m) => CliError::Parse(wrap(m)),
            CliError::Consistency(m) => CliError::Consistency(wrap(m)),
            CliError::Checkpoint(m) => CliError::Checkpoint(wrap(m)),
            CliError::Other(m) => CliError::Other(wrap(m)),
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(_) => CliError::Io(e.to_string()),
            DataError::MissingTable(_) => CliError::Consistency(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Io(_) => CliError::Io(e.to_string()),
            FileError::KappaMismatch { .. } => CliError::Consistency(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<EnrichError> for CliError {
    fn from(e: EnrichError) -> Self {
        match e {
            EnrichError::BoundExceeded { .. } => CliError::Config(e.to_string()),
            EnrichError::EmptyStatistic => CliError::Other(e.to_string()),
            _ => CliError::Consistency(e.to_string()),
        }
    }
}

impl From<AutodiffError> for CliError {
    fn from(e: AutodiffError) -> Self {
        match e {
            AutodiffError::Checkpoint(m) => CliError::Checkpoint(m),
            AutodiffError::Config(m) => CliError::Config(m),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Autodiff(inner) => inner.into(),
            ModelError::Enrich(inner) => inner.into(),
            ModelError::Data(inner) => inner.into(),
            ModelError::KappaMismatch { .. } => CliError::Consistency(e.to_string()),
            ModelError::Config(m) => CliError::Config(m),
            ModelError::WordVectors { .. } => CliError::Parse(e.to_string()),
            ModelError::Checkpoint(m) => CliError::Checkpoint(m),
            ModelError::Io(m) => CliError::Io(m),
            ModelError::EmptySequence(_) | ModelError::InvalidLabel { .. } => CliError::Other(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_have_distinct_codes() {
        let all = [
            CliError::Other(String::new()),
            CliError::Config(String::new()),
            CliError::Io(String::new()),
            CliError::Parse(String::new()),
            CliError::Consistency(String::new()),
            CliError::Checkpoint(String::new()),
        ];
        let mut codes: Vec<i32> = all.iter().map(CliError::exit_code).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn core_errors_map_to_classes() {
        let e: CliError = ModelError::KappaMismatch { expected: 3, found: 1 }.into();
        assert_eq!(e.exit_code(), 5);
        let e: CliError = ModelError::Autodiff(AutodiffError::Checkpoint("v9".into())).into();
        assert_eq!(e.exit_code(), 6);
        let e: CliError = DataError::MissingTable("q".into()).into();
        assert_eq!(e.exit_code(), 5);
        let e: CliError = LexiconError::NotFound("x".into()).into();
        assert_eq!(e.exit_code(), 4);
    }
}
