use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentModel, RelationInstance};

use super::FeatureError;

/// Preceding sentence, sentences spanning both arguments, following sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextWindow {
    pub pre: String,
    pub focal: String,
    pub post: String,
}

/// Sentence indices `(first, last)` covering both arguments.
pub(crate) fn argument_sentences(
    instance: &RelationInstance,
    doc: &DocumentModel,
) -> Option<(usize, usize)> {
    let by_span = || -> Option<(usize, usize)> {
        let idx = [
            instance.unit1_spans.first(),
            instance.unit1_spans.last(),
            instance.unit2_spans.first(),
            instance.unit2_spans.last(),
        ]
        .into_iter()
        .map(|t| doc.sentence_of_token(t))
        .collect::<Option<Vec<usize>>>()?;
        Some((*idx.iter().min()?, *idx.iter().max()?))
    };
    let by_text = || -> Option<(usize, usize)> {
        let a = doc.sentence_by_text(&instance.sent1_text)?;
        let b = doc.sentence_by_text(&instance.sent2_text)?;
        Some((a.min(b), a.max(b)))
    };
    by_span().or_else(by_text)
}

/// Locates the argument sentences by token span, falling back to sentence-text
/// matching, and returns the surrounding window.
pub fn extract_context(
    instance: &RelationInstance,
    doc: &DocumentModel,
) -> Result<ContextWindow, FeatureError> {
    if instance.doc_id != doc.doc_id() {
        return Err(FeatureError::DocMismatch {
            instance: instance.doc_id.clone(),
            document: doc.doc_id().to_string(),
        });
    }
    let (first, last) = argument_sentences(instance, doc).ok_or_else(|| {
        FeatureError::SentenceNotFound {
            doc_id: instance.doc_id.clone(),
            instance_id: instance.instance_id,
        }
    })?;
    let sentences = doc.sentences();
    let pre = first
        .checked_sub(1)
        .map(|i| sentences[i].text())
        .unwrap_or_default();
    let focal = sentences[first..=last]
        .iter()
        .map(|s| s.text())
        .collect::<Vec<_>>()
        .join(" ");
    let post = sentences
        .get(last + 1)
        .map(|s| s.text())
        .unwrap_or_default();
    Ok(ContextWindow { pre, focal, post })
}

/// Like [`extract_context`], but degrades to the instance's own sentence
/// columns when the document cannot place the arguments. The error that
/// triggered the fallback is returned alongside.
pub fn extract_context_or_fallback(
    instance: &RelationInstance,
    doc: &DocumentModel,
) -> (ContextWindow, Option<FeatureError>) {
    match extract_context(instance, doc) {
        Ok(w) => (w, None),
        Err(e) => {
            let (s1, s2) = if instance.sent1_text.trim().is_empty() && instance.sent2_text.trim().is_empty() {
                (instance.unit1_text.trim(), instance.unit2_text.trim())
            } else {
                (instance.sent1_text.trim(), instance.sent2_text.trim())
            };
            let focal = if s1 == s2 || s2.is_empty() {
                s1.to_string()
            } else if s1.is_empty() {
                s2.to_string()
            } else {
                format!("{s1} {s2}")
            };
            (
                ContextWindow {
                    pre: String::new(),
                    focal,
                    post: String::new(),
                },
                Some(e),
            )
        }
    }
}
