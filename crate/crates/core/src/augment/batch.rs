use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AugmentError, AugmentationPlan};
use crate::corpus::{serialize_rels, CorpusId, RelationInstance, SerializedRels, TokenSpanSet};
use crate::features::ContextWindow;

pub const BATCH_HEADER: &str = "corpus\tinstance_id\tfield\tsource_text\ttranslated_text";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchField {
    Unit1,
    Unit2,
    Sent1,
    Sent2,
    ContextPre,
    ContextPost,
}

impl BatchField {
    pub const ALL: [BatchField; 6] = [
        BatchField::Unit1,
        BatchField::Unit2,
        BatchField::Sent1,
        BatchField::Sent2,
        BatchField::ContextPre,
        BatchField::ContextPost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BatchField::Unit1 => "unit1",
            BatchField::Unit2 => "unit2",
            BatchField::Sent1 => "sent1",
            BatchField::Sent2 => "sent2",
            BatchField::ContextPre => "context_pre",
            BatchField::ContextPost => "context_post",
        }
    }
}

impl fmt::Display for BatchField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BatchField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        BatchField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown batch field '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchRow {
    pub corpus: CorpusId,
    pub instance_id: usize,
    pub field: BatchField,
    pub source_text: String,
    pub translated_text: Option<String>,
}

/// Texts sent out for translation and, once filled in, read back for merging.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranslationBatch {
    rows: Vec<BatchRow>,
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

impl TranslationBatch {
    /// Sorts rows by (corpus, instance, field) and rejects duplicate keys.
    pub fn new(mut rows: Vec<BatchRow>) -> Result<Self, AugmentError> {
        rows.sort_by(|a, b| (&a.corpus, a.instance_id, a.field).cmp(&(&b.corpus, b.instance_id, b.field)));
        for w in rows.windows(2) {
            if (&w[0].corpus, w[0].instance_id, w[0].field) == (&w[1].corpus, w[1].instance_id, w[1].field) {
                return Err(AugmentError::DuplicateRow {
                    corpus: w[0].corpus.clone(),
                    instance_id: w[0].instance_id,
                    field: w[0].field,
                });
            }
        }
        Ok(TranslationBatch { rows })
    }

    pub fn rows(&self) -> &[BatchRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn translation(&self, corpus: &CorpusId, instance_id: usize, field: BatchField) -> Option<&str> {
        self.rows
            .binary_search_by(|r| (&r.corpus, r.instance_id, r.field).cmp(&(corpus, instance_id, field)))
            .ok()
            .and_then(|i| self.rows[i].translated_text.as_deref())
            .filter(|t| !t.trim().is_empty())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(BATCH_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.corpus,
                r.instance_id,
                r.field,
                clean(&r.source_text),
                clean(r.translated_text.as_deref().unwrap_or(""))
            ));
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self, AugmentError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end_matches('\r') == BATCH_HEADER => {}
            _ => {
                return Err(AugmentError::BadBatch {
                    line: 1,
                    message: format!("expected header '{BATCH_HEADER}'"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, raw) in lines {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| AugmentError::BadBatch {
                line: i + 1,
                message,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 && cols.len() != 4 {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            }
            let translated = cols.get(4).map(|s| s.to_string()).filter(|s| !s.is_empty());
            rows.push(BatchRow {
                corpus: cols[0].parse().map_err(|e| bad(format!("{e}")))?,
                instance_id: cols[1].parse().map_err(|_| bad(format!("bad instance id '{}'", cols[1])))?,
                field: cols[2].parse().map_err(bad)?,
                source_text: cols[3].to_string(),
                translated_text: translated,
            });
        }
        TranslationBatch::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self, AugmentError> {
        let text = std::fs::read_to_string(path).map_err(|e| AugmentError::io(path, e))?;
        Self::parse_tsv(&text)
    }
}

/// Source instance plus its context window, keyed by (corpus, instance id).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRecord {
    pub instance: RelationInstance,
    pub context: Option<ContextWindow>,
}

pub type SourceIndex = BTreeMap<(CorpusId, usize), SourceRecord>;

/// One row per selected instance and requested field with non-empty text.
pub fn emit_translation_batch(
    plan: &AugmentationPlan,
    sources: &SourceIndex,
    fields: &[BatchField],
) -> Result<TranslationBatch, AugmentError> {
    let fields: BTreeSet<BatchField> = fields.iter().copied().collect();
    let mut rows = Vec::new();
    for sel in &plan.selected {
        let rec = sources
            .get(&(sel.corpus.clone(), sel.instance_id))
            .ok_or_else(|| AugmentError::MissingInstance {
                corpus: sel.corpus.clone(),
                instance_id: sel.instance_id,
            })?;
        let inst = &rec.instance;
        for &field in &fields {
            let text = match field {
                BatchField::Unit1 => Some(inst.unit1_text.as_str()),
                BatchField::Unit2 => Some(inst.unit2_text.as_str()),
                BatchField::Sent1 => Some(inst.sent1_text.as_str()),
                BatchField::Sent2 => Some(inst.sent2_text.as_str()),
                BatchField::ContextPre => rec.context.as_ref().map(|c| c.pre.as_str()),
                BatchField::ContextPost => rec.context.as_ref().map(|c| c.post.as_str()),
            };
            let Some(text) = text.filter(|t| !t.trim().is_empty()) else {
                continue;
            };
            rows.push(BatchRow {
                corpus: sel.corpus.clone(),
                instance_id: sel.instance_id,
                field,
                source_text: clean(text),
                translated_text: None,
            });
        }
    }
    TranslationBatch::new(rows)
}

#[derive(Debug, Clone)]
pub struct MergeOutput {
    pub instances: Vec<RelationInstance>,
    pub rels: SerializedRels,
}

/// File name for the augmented split of `target`, kept apart from the
/// original training file.
pub fn augmented_file_name(target: &CorpusId) -> String {
    format!("{target}_train.aug.rels")
}

/// Builds translated instances from a completed batch. Labels, directions and
/// untouched columns come from the source; spans are rebuilt as contiguous
/// ranges over the translated token counts.
pub fn merge_translations<S: AsRef<str>>(
    plan: &AugmentationPlan,
    batch: &TranslationBatch,
    sources: &SourceIndex,
    header: &[S],
) -> Result<MergeOutput, AugmentError> {
    let mut missing = Vec::new();
    for sel in &plan.selected {
        for field in [BatchField::Unit1, BatchField::Unit2] {
            if batch.translation(&sel.corpus, sel.instance_id, field).is_none() {
                missing.push((sel.corpus.clone(), sel.instance_id, field));
            }
        }
    }
    if !missing.is_empty() {
        return Err(AugmentError::IncompleteBatch(missing));
    }

    let mut instances = Vec::with_capacity(plan.selected.len());
    for sel in &plan.selected {
        let src = &sources
            .get(&(sel.corpus.clone(), sel.instance_id))
            .ok_or_else(|| AugmentError::MissingInstance {
                corpus: sel.corpus.clone(),
                instance_id: sel.instance_id,
            })?
            .instance;
        let tr = |f| batch.translation(&sel.corpus, sel.instance_id, f);
        let u1 = tr(BatchField::Unit1).expect("checked above").to_string();
        let u2 = tr(BatchField::Unit2).expect("checked above").to_string();
        let n1 = u1.split_whitespace().count().max(1);
        let n2 = u2.split_whitespace().count().max(1);
        let (s1, s2) = if src.unit1_spans.first() <= src.unit2_spans.first() {
            ((1, n1), (n1 + 1, n1 + n2))
        } else {
            ((n2 + 1, n2 + n1), (1, n2))
        };
        instances.push(RelationInstance {
            instance_id: instances.len(),
            doc_id: format!("aug_{}", src.doc_id),
            sent1_text: tr(BatchField::Sent1).unwrap_or(&u1).to_string(),
            sent2_text: tr(BatchField::Sent2).unwrap_or(&u2).to_string(),
            unit1_text: u1,
            unit2_text: u2,
            unit1_spans: TokenSpanSet::contiguous(s1.0, s1.1).expect("non-empty span"),
            unit2_spans: TokenSpanSet::contiguous(s2.0, s2.1).expect("non-empty span"),
            sent1_spans: None,
            sent2_spans: None,
            direction: src.direction,
            label: src.label.clone(),
            orig_label: src.orig_label.clone(),
            label_known: src.label_known,
            extra: src.extra.clone(),
        });
    }
    let rels = serialize_rels(&instances, header);
    Ok(MergeOutput { instances, rels })
}
