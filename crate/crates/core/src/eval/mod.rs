//! Scoring predictions against gold relations, aggregation across corpora,
//! confusion matrices and ablation gain tables.

mod ablation;
mod confusion;
mod repair;
mod score;

#[cfg(test)]
mod tests;

use std::path::PathBuf;

pub use ablation::{ablation_report, AblationRow, AblationTable};
pub use confusion::{confusion_to_matrix, ConfusionMatrix};
pub use repair::{repair_labels, Repaired};
pub use score::{
    aggregate, load_report_dir, score_corpus, Aggregate, Confusion, CorpusResult, CorpusScore,
    EvalReport, PredictionFile, SCORE_TABLE_HEADER,
};

use crate::corpus::CorpusId;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{corpus}: gold has {gold} instances, predictions have {pred}")]
    LengthMismatch {
        corpus: CorpusId,
        gold: usize,
        pred: usize,
    },
    #[error("{corpus}: prediction ids do not match gold ids (first difference at id {id})")]
    IdMismatch { corpus: CorpusId, id: usize },
    #[error("{0}: no gold instances")]
    EmptyCorpus(CorpusId),
    #[error("no corpora to aggregate")]
    NoCorpora,
    #[error("label inventory is empty")]
    EmptyInventory,
    #[error("corpus sets differ: only in baseline {only_baseline:?}, only in ablated {only_ablated:?}")]
    CorpusSetMismatch {
        only_baseline: Vec<CorpusId>,
        only_ablated: Vec<CorpusId>,
    },
    #[error("{path}, line {line}: {message}")]
    BadFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EvalError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        EvalError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Two-decimal display used by every report.
pub fn pct(v: f64) -> String {
    format!("{v:.2}")
}
