use std::path::Path;

use super::{CorpusError, DocumentModel, Sentence};

/// Document id used for sentences that precede any `# newdoc id` comment.
const UNNAMED_DOC: &str = "unnamed";

pub fn parse_conllu(path: &Path) -> Result<Vec<DocumentModel>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_conllu_str(&text)
}

#[derive(Default)]
struct DocBuilder {
    id: Option<String>,
    genre: String,
    sentences: Vec<Sentence>,
}

impl DocBuilder {
    fn finish(self, out: &mut Vec<DocumentModel>) {
        if self.id.is_none() && self.sentences.is_empty() {
            return;
        }
        out.push(DocumentModel::new(
            self.id.unwrap_or_else(|| UNNAMED_DOC.to_string()),
            self.sentences,
            self.genre,
        ));
    }
}

/// Reads documents from CoNLL-U text. Only the sentence structure, token forms,
/// speaker comments and genre metadata are retained.
pub fn parse_conllu_str(text: &str) -> Result<Vec<DocumentModel>, CorpusError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut docs = Vec::new();
    let mut doc = DocBuilder::default();
    let mut tokens: Vec<String> = Vec::new();
    let mut speaker: Option<String> = None;
    let mut in_sentence = false;

    let flush_sentence =
        |doc: &mut DocBuilder, tokens: &mut Vec<String>, speaker: &mut Option<String>, in_sentence: &mut bool| {
            if *in_sentence && !tokens.is_empty() {
                doc.sentences
                    .push(Sentence::new(std::mem::take(tokens), speaker.take()));
            }
            tokens.clear();
            *speaker = None;
            *in_sentence = false;
        };

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush_sentence(&mut doc, &mut tokens, &mut speaker, &mut in_sentence);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "newdoc id" | "newdoc_id" => {
                    flush_sentence(&mut doc, &mut tokens, &mut speaker, &mut in_sentence);
                    std::mem::take(&mut doc).finish(&mut docs);
                    doc.id = Some(value.to_string());
                }
                "speaker" => {
                    speaker = Some(value.to_string());
                    in_sentence = true;
                }
                "meta::genre" | "genre" => doc.genre = value.to_string(),
                _ => {}
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(CorpusError::MalformedLine(idx + 1));
        }
        in_sentence = true;
        // multiword ranges (3-4) and empty nodes (3.1) carry no surface token of their own
        if fields[0].contains(['-', '.']) {
            continue;
        }
        tokens.push(fields[1].to_string());
    }
    flush_sentence(&mut doc, &mut tokens, &mut speaker, &mut in_sentence);
    doc.finish(&mut docs);
    Ok(docs)
}
