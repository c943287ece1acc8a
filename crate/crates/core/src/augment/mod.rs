//! Cross-lingual augmentation: choose English source instances for a
//! low-resource target, export them for translation and merge the results.

mod batch;
mod filter;
mod mapping;
mod plan;


use std::path::{Path, PathBuf};

pub use batch::{
    augmented_file_name, emit_translation_batch, merge_translations, BatchField, BatchRow,
    MergeOutput, SourceIndex, SourceRecord, TranslationBatch, BATCH_HEADER,
};
pub use filter::{predicates_for, structural_filter, Predicate, DEFAULT_RELATIVE_PRONOUNS};
pub use mapping::{
    default_mappings, load_mappings, parse_mappings, AugmentationMapping, GenreFilter,
    DEFAULT_RATIO,
};
pub use plan::{apportion, plan_augmentation, total_quota, AugmentationPlan, Selection, SourceInstance};

use crate::corpus::CorpusId;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("unknown structural predicate '{0}'")]
    UnknownPredicate(String),
    #[error("mapping line {line}: {message}")]
    BadMapping { line: usize, message: String },
    #[error("{0}: no source instance survives the genre and structural filters")]
    EmptySupply(CorpusId),
    #[error("{corpus}: instance {instance_id} not found among sources")]
    MissingInstance { corpus: CorpusId, instance_id: usize },
    #[error("translation batch is missing {} required field(s), first: {}", .0.len(), describe_first(.0))]
    IncompleteBatch(Vec<(CorpusId, usize, BatchField)>),
    #[error("batch line {line}: {message}")]
    BadBatch { line: usize, message: String },
    #[error("duplicate batch row {corpus} {instance_id} {field}")]
    DuplicateRow {
        corpus: CorpusId,
        instance_id: usize,
        field: BatchField,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn describe_first(missing: &[(CorpusId, usize, BatchField)]) -> String {
    missing
        .first()
        .map(|(c, i, f)| format!("{c} {i} {f}"))
        .unwrap_or_default()
}

impl AugmentError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        AugmentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
