use std::collections::BTreeMap;
use std::path::Path;

use super::{CorpusError, CorpusId};

const DEFAULT_OVERRIDES: &str = include_str!("../../config/genres.tsv");

/// Per-corpus default genre for documents whose ids carry no genre.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenreOverrides(BTreeMap<CorpusId, String>);

impl GenreOverrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_OVERRIDES).expect("bundled genre overrides are valid")
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(corpus), Some(genre), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(CorpusError::BadGenreConfig(format!(
                    "line {}: expected '<corpus> <genre>'",
                    i + 1
                )));
            };
            map.insert(corpus.parse()?, genre.to_string());
        }
        Ok(GenreOverrides(map))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, corpus: CorpusId, genre: impl Into<String>) {
        self.0.insert(corpus, genre.into());
    }

    pub fn get(&self, corpus: &CorpusId) -> Option<&str> {
        self.0.get(corpus).map(String::as_str)
    }
}

/// Genre of a document: the second field of GUM-style `PREFIX_genre_title`
/// ids, else the corpus override, else `"unknown"`.
pub fn infer_genre(doc_id: &str, corpus: &CorpusId, overrides: &GenreOverrides) -> String {
    let parts: Vec<&str> = doc_id.split('_').collect();
    if parts.len() >= 3 {
        let genre = parts[1];
        if !genre.is_empty() && genre.chars().all(char::is_alphabetic) {
            return genre.to_lowercase();
        }
    }
    overrides
        .get(corpus)
        .map(str::to_string)
        .unwrap_or_else(|| "unknown".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gum_style_id() {
        let gum: CorpusId = "eng.erst.gum".parse().unwrap();
        assert_eq!(
            infer_genre("GUM_reddit_macroeconomics", &gum, &GenreOverrides::new()),
            "reddit"
        );
    }

    #[test]
    fn override_then_unknown() {
        let pdtb: CorpusId = "eng.pdtb.pdtb".parse().unwrap();
        let mut ov = GenreOverrides::new();
        ov.insert(pdtb.clone(), "news");
        assert_eq!(infer_genre("wsj_0610", &pdtb, &ov), "news");
        let other: CorpusId = "deu.rst.pcc".parse().unwrap();
        assert_eq!(infer_genre("doc1", &other, &ov), "unknown");
        assert_eq!(infer_genre("wsj_0610", &pdtb, &GenreOverrides::bundled()), "news");
    }

    #[test]
    fn numeric_middle_field_is_not_a_genre() {
        let c: CorpusId = "deu.rst.pcc".parse().unwrap();
        assert_eq!(infer_genre("maz_123_45", &c, &GenreOverrides::new()), "unknown");
    }
}
