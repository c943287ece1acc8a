use serde::{Deserialize, Serialize};

use super::RelationInstance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub speaker: Option<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, speaker: Option<String>) -> Self {
        Sentence { tokens, speaker }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Ordered sentences of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentModel {
    doc_id: String,
    sentences: Vec<Sentence>,
    genre: String,
    token_count: usize,
    synthetic: bool,
}

impl DocumentModel {
    pub fn new(doc_id: impl Into<String>, sentences: Vec<Sentence>, genre: impl Into<String>) -> Self {
        let token_count = sentences.iter().map(|s| s.tokens.len()).sum();
        DocumentModel {
            doc_id: doc_id.into(),
            sentences,
            genre: genre.into(),
            token_count,
            synthetic: false,
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn genre(&self) -> &str {
        &self.genre
    }

    pub fn set_genre(&mut self, genre: impl Into<String>) {
        self.genre = genre.into();
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    /// True when the document was rebuilt from `.rels` sentence columns
    /// instead of a CoNLL-U file; token offsets then do not line up with
    /// the corpus token indices.
    pub fn is_synthetic(&self) -> bool {
        self.synthetic
    }

    pub fn has_speakers(&self) -> bool {
        self.sentences.iter().any(|s| s.speaker.is_some())
    }

    /// Inclusive 1-based token bounds of each sentence.
    pub fn sentence_bounds(&self) -> Vec<(usize, usize)> {
        let mut next = 1;
        self.sentences
            .iter()
            .map(|s| {
                let start = next;
                next += s.tokens.len();
                (start, next - 1)
            })
            .collect()
    }

    pub fn sentence_of_token(&self, token: usize) -> Option<usize> {
        if self.synthetic {
            return None;
        }
        self.sentence_bounds()
            .iter()
            .position(|&(start, end)| start <= token && token <= end)
    }

    /// Index of the first sentence whose whitespace-normalized text equals `text`.
    pub fn sentence_by_text(&self, text: &str) -> Option<usize> {
        let wanted: Vec<&str> = text.split_whitespace().collect();
        if wanted.is_empty() {
            return None;
        }
        self.sentences.iter().position(|s| {
            s.tokens.len() == wanted.len() && s.tokens.iter().zip(&wanted).all(|(a, b)| a == b)
        })
    }
}

/// Rebuilds a document from the sentence columns of its `.rels` rows when no
/// CoNLL-U source is available.
pub fn synthesize_document(
    doc_id: &str,
    rows: &[&RelationInstance],
    genre: &str,
) -> DocumentModel {
    let mut found: Vec<(usize, usize, &str)> = Vec::new();
    for (order, row) in rows.iter().filter(|r| r.doc_id == doc_id).enumerate() {
        for (spans, text) in [
            (&row.sent1_spans, row.sent1_text.as_str()),
            (&row.sent2_spans, row.sent2_text.as_str()),
        ] {
            if text.trim().is_empty() {
                continue;
            }
            let start = spans.as_ref().map_or(usize::MAX, |s| s.first());
            if let Some(existing) = found.iter_mut().find(|(_, _, t)| norm_eq(t, text)) {
                existing.0 = existing.0.min(start);
            } else {
                found.push((start, order, text));
            }
        }
    }
    found.sort_by_key(|&(start, order, _)| (start, order));
    let sentences = found
        .into_iter()
        .map(|(_, _, text)| {
            Sentence::new(text.split_whitespace().map(str::to_string).collect(), None)
        })
        .collect();
    let mut doc = DocumentModel::new(doc_id, sentences, genre);
    doc.synthetic = true;
    doc
}

fn norm_eq(a: &str, b: &str) -> bool {
    a.split_whitespace().eq(b.split_whitespace())
}
