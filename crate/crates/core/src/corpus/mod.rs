//! Typed views of DISRPT relation files and their CoNLL-U companions.

mod conllu;
mod document;
mod genre;
mod id;
mod labels;
mod rels;
mod spans;

use std::path::{Path, PathBuf};

pub use conllu::{parse_conllu, parse_conllu_str};
pub use document::{synthesize_document, DocumentModel, Sentence};
pub use genre::{infer_genre, GenreOverrides};
pub use id::{CorpusId, Framework, KNOWN_CORPORA};
pub use labels::LabelInventory;
pub use rels::{
    parse_rels, parse_rels_str, serialize_rels, Direction, ParsedRels, RelationInstance,
    RelsWarning, SerializedRels, DEFAULT_HEADER, REQUIRED_COLUMNS,
};
pub use spans::{SpanParseError, TokenRange, TokenSpanSet};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing header row")]
    MissingHeader,
    #[error("missing required column '{0}'")]
    MissingColumn(String),
    #[error("line {line}: direction must be '1>2' or '1<2', got '{value}'")]
    BadDirection { line: usize, value: String },
    #[error("line {line}: bad span in column '{column}': '{value}'")]
    BadSpan {
        line: usize,
        column: String,
        value: String,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {0}: malformed token line")]
    MalformedLine(usize),
    #[error("bad corpus id: {0}")]
    BadCorpusId(String),
    #[error("bad label config: {0}")]
    BadLabelConfig(String),
    #[error("bad genre override file: {0}")]
    BadGenreConfig(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
