//! Instance-level features: corpus identity, the hand-crafted unit and
//! document features, direction markers, and the sentence context window.

mod context;
mod direction;
mod units;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusId, DocumentModel, RelationInstance, TokenSpanSet};

pub use context::{extract_context, extract_context_or_fallback, ContextWindow};
pub use direction::{direction_markers, mark_direction, strip_direction};
pub use units::UnitInventory;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("instance belongs to document '{instance}' but '{document}' was supplied")]
    DocMismatch { instance: String, document: String },
    #[error("document '{doc_id}': no sentence found for the arguments of instance {instance_id}")]
    SentenceNotFound { doc_id: String, instance_id: usize },
    #[error("empty first argument")]
    EmptyArgument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SameSpeaker {
    True,
    False,
    Unknown,
}

impl fmt::Display for SameSpeaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SameSpeaker::True => "true",
            SameSpeaker::False => "false",
            SameSpeaker::Unknown => "unknown",
        })
    }
}

/// Case-folded stop words excluded from lexical overlap.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist(HashSet<String>);

impl Stoplist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stoplist(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    /// One token per line; blank lines ignored.
    pub fn parse(text: &str) -> Self {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, folded: &str) -> bool {
        self.0.contains(folded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub lcf: CorpusId,
    pub genre: String,
    /// Absent when no unit inventory exists for the document.
    pub children_u1: Option<usize>,
    pub children_u2: Option<usize>,
    pub discontinuous_u1: bool,
    pub discontinuous_u2: bool,
    pub is_sentence_u1: bool,
    pub is_sentence_u2: bool,
    /// tokens(u1) / tokens(u2)
    pub length_ratio: f64,
    pub same_speaker: SameSpeaker,
    pub doc_length: usize,
    /// (first token of u1 - 1) / document length, clamped to [0, 1]
    pub position: f64,
    pub distance: usize,
    pub lexical_overlap: usize,
}

pub const FEATURE_COLUMNS: [&str; 16] = [
    "instance_id",
    "doc",
    "lcf",
    "genre",
    "children_u1",
    "children_u2",
    "discontinuous_u1",
    "discontinuous_u2",
    "is_sentence_u1",
    "is_sentence_u2",
    "length_ratio",
    "same_speaker",
    "doc_length",
    "position",
    "distance",
    "lexical_overlap",
];

impl FeatureVector {
    pub fn tsv_row(&self, instance_id: usize, doc_id: &str) -> String {
        let opt = |v: Option<usize>| v.map_or_else(|| "_".to_string(), |n| n.to_string());
        [
            instance_id.to_string(),
            doc_id.replace(['\t', '\n'], " "),
            self.lcf.to_string(),
            self.genre.clone(),
            opt(self.children_u1),
            opt(self.children_u2),
            self.discontinuous_u1.to_string(),
            self.discontinuous_u2.to_string(),
            self.is_sentence_u1.to_string(),
            self.is_sentence_u2.to_string(),
            self.length_ratio.to_string(),
            self.same_speaker.to_string(),
            self.doc_length.to_string(),
            self.position.to_string(),
            self.distance.to_string(),
            self.lexical_overlap.to_string(),
        ]
        .join("\t")
    }
}

/// Renders a featurized corpus as TSV with a [`FEATURE_COLUMNS`] header.
pub fn features_tsv<'a>(
    rows: impl IntoIterator<Item = (&'a RelationInstance, &'a FeatureVector)>,
) -> String {
    let mut out = FEATURE_COLUMNS.join("\t");
    out.push('\n');
    for (inst, fv) in rows {
        out.push_str(&fv.tsv_row(inst.instance_id, &inst.doc_id));
        out.push('\n');
    }
    out
}

fn is_sentence(
    unit: &TokenSpanSet,
    unit_text: &str,
    sent_spans: Option<&TokenSpanSet>,
    sent_text: &str,
    doc: &DocumentModel,
) -> bool {
    if !doc.is_synthetic() {
        if let Some(s) = doc.sentence_of_token(unit.first()) {
            let (start, end) = doc.sentence_bounds()[s];
            return !unit.discontinuous() && unit.first() == start && unit.last() == end;
        }
    }
    if let Some(sent) = sent_spans {
        return sent == unit;
    }
    !sent_text.trim().is_empty() && unit_text.split_whitespace().eq(sent_text.split_whitespace())
}

fn speaker_of(doc: &DocumentModel, token: usize) -> Option<&str> {
    let idx = doc.sentence_of_token(token)?;
    doc.sentences()[idx].speaker.as_deref()
}

fn lexical_overlap(a: &str, b: &str, stoplist: &Stoplist) -> usize {
    let types = |s: &str| -> HashSet<String> {
        s.split_whitespace()
            .map(str::to_lowercase)
            .filter(|w| !stoplist.contains(w))
            .collect()
    };
    types(a).intersection(&types(b)).count()
}

/// Sentence boundaries crossed between the end of the earlier unit and the
/// start of the later one.
fn boundary_distance(instance: &RelationInstance, doc: &DocumentModel) -> usize {
    let (u1, u2) = (&instance.unit1_spans, &instance.unit2_spans);
    let u1_first = u1.first() <= u2.first();
    let (left, right) = if u1_first { (u1, u2) } else { (u2, u1) };
    if left.last() >= right.first() {
        return 0;
    }
    if let (Some(a), Some(b)) = (
        doc.sentence_of_token(left.last()),
        doc.sentence_of_token(right.first()),
    ) {
        return b.saturating_sub(a);
    }
    let (left_text, right_text) = if u1_first {
        (&instance.sent1_text, &instance.sent2_text)
    } else {
        (&instance.sent2_text, &instance.sent1_text)
    };
    match (doc.sentence_by_text(left_text), doc.sentence_by_text(right_text)) {
        (Some(a), Some(b)) => b.saturating_sub(a),
        _ => 0,
    }
}

/// Computes the full feature vector of one instance.
pub fn compute_features(
    instance: &RelationInstance,
    doc: &DocumentModel,
    corpus: &CorpusId,
    units: Option<&UnitInventory>,
    stoplist: &Stoplist,
) -> Result<FeatureVector, FeatureError> {
    if instance.doc_id != doc.doc_id() {
        return Err(FeatureError::DocMismatch {
            instance: instance.doc_id.clone(),
            document: doc.doc_id().to_string(),
        });
    }
    let (u1, u2) = (&instance.unit1_spans, &instance.unit2_spans);

    let same_speaker = if !doc.has_speakers() {
        SameSpeaker::Unknown
    } else {
        match (speaker_of(doc, u1.first()), speaker_of(doc, u2.first())) {
            (Some(a), Some(b)) if a == b => SameSpeaker::True,
            (Some(_), Some(_)) => SameSpeaker::False,
            _ => SameSpeaker::Unknown,
        }
    };

    let doc_length = doc.token_count();
    let position = if doc_length == 0 {
        0.0
    } else {
        ((u1.first() - 1) as f64 / doc_length as f64).clamp(0.0, 1.0)
    };

    let distance = units
        .filter(|inv| !inv.is_degenerate())
        .and_then(|inv| inv.units_between(u1, u2))
        .unwrap_or_else(|| boundary_distance(instance, doc));

    Ok(FeatureVector {
        lcf: corpus.clone(),
        genre: doc.genre().to_string(),
        children_u1: units.map(|inv| inv.children(u1)),
        children_u2: units.map(|inv| inv.children(u2)),
        discontinuous_u1: u1.discontinuous(),
        discontinuous_u2: u2.discontinuous(),
        is_sentence_u1: is_sentence(
            u1,
            &instance.unit1_text,
            instance.sent1_spans.as_ref(),
            &instance.sent1_text,
            doc,
        ),
        is_sentence_u2: is_sentence(
            u2,
            &instance.unit2_text,
            instance.sent2_spans.as_ref(),
            &instance.sent2_text,
            doc,
        ),
        length_ratio: u1.token_count() as f64 / u2.token_count() as f64,
        same_speaker,
        doc_length,
        position,
        distance,
        lexical_overlap: lexical_overlap(&instance.unit1_text, &instance.unit2_text, stoplist),
    })
}
