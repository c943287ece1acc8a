use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;

const DEFAULT_LABELS: &str = include_str!("../../config/labels.txt");

/// Ordered, case-insensitive set of relation labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelInventory {
    labels: Vec<String>,
    glosses: Vec<Option<String>>,
}

impl LabelInventory {
    pub fn new<I, S>(labels: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut inv = LabelInventory {
            labels: Vec::new(),
            glosses: Vec::new(),
        };
        for l in labels {
            inv.push(l.as_ref(), None)?;
        }
        Ok(inv)
    }

    fn push(&mut self, label: &str, gloss: Option<String>) -> Result<(), CorpusError> {
        let folded = label.trim().to_lowercase();
        if folded.is_empty() {
            return Err(CorpusError::BadLabelConfig("empty label".into()));
        }
        if self.labels.contains(&folded) {
            return Err(CorpusError::BadLabelConfig(format!(
                "duplicate label '{folded}'"
            )));
        }
        self.labels.push(folded);
        self.glosses.push(gloss);
        Ok(())
    }

    /// Parses the label config format: one label per line, optional
    /// tab-separated gloss, `#` comments.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut inv = LabelInventory {
            labels: Vec::new(),
            glosses: Vec::new(),
        };
        for line in text.lines() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (label, gloss) = match line.split_once('\t') {
                Some((l, g)) if !g.trim().is_empty() => (l, Some(g.trim().to_string())),
                Some((l, _)) => (l, None),
                None => (line, None),
            };
            inv.push(label, gloss)?;
        }
        if inv.labels.is_empty() {
            return Err(CorpusError::BadLabelConfig("no labels".into()));
        }
        Ok(inv)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::parse(&text)
    }

    /// The unified 17-label inventory bundled with the crate.
    pub fn default_inventory() -> Self {
        Self::parse(DEFAULT_LABELS).expect("bundled label config is valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gloss(&self, index: usize) -> Option<&str> {
        self.glosses.get(index).and_then(|g| g.as_deref())
    }

    pub fn has_glosses(&self) -> bool {
        self.glosses.iter().any(Option::is_some)
    }

    /// Canonical (lowercase) form of `raw` when it names an inventory label.
    pub fn canonical(&self, raw: &str) -> Option<&str> {
        let folded = raw.trim().to_lowercase();
        self.labels
            .iter()
            .find(|l| **l == folded)
            .map(String::as_str)
    }

    pub fn contains(&self, raw: &str) -> bool {
        self.canonical(raw).is_some()
    }

    pub fn index_of(&self, raw: &str) -> Option<usize> {
        let folded = raw.trim().to_lowercase();
        self.labels.iter().position(|l| *l == folded)
    }

    pub fn index_map(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }
}
