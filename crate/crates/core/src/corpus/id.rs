use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Annotation framework of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    Rst,
    Pdtb,
    Sdrt,
    Dep,
    Erst,
    Iso,
}

impl Framework {
    pub const ALL: [Framework; 6] = [
        Framework::Rst,
        Framework::Pdtb,
        Framework::Sdrt,
        Framework::Dep,
        Framework::Erst,
        Framework::Iso,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Framework::Rst => "rst",
            Framework::Pdtb => "pdtb",
            Framework::Sdrt => "sdrt",
            Framework::Dep => "dep",
            Framework::Erst => "erst",
            Framework::Iso => "iso",
        }
    }

    /// Frameworks whose relation files list argument pairs rather than a full
    /// segmentation of the document.
    pub fn is_shallow(self) -> bool {
        matches!(self, Framework::Pdtb | Framework::Iso)
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Framework {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Framework::ALL
            .into_iter()
            .find(|fw| fw.as_str() == s)
            .ok_or_else(|| CorpusError::BadCorpusId(format!("unknown framework '{s}'")))
    }
}

/// Language / framework / corpus identity, rendered as `lang.framework.corpus`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorpusId {
    language: String,
    framework: Framework,
    corpus: String,
}

impl CorpusId {
    pub fn new(language: &str, framework: Framework, corpus: &str) -> Result<Self, CorpusError> {
        if language.len() != 3 || !language.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(CorpusError::BadCorpusId(format!(
                "language '{language}' is not a lowercase ISO-639-3 code"
            )));
        }
        if corpus.is_empty()
            || !corpus
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
        {
            return Err(CorpusError::BadCorpusId(format!(
                "corpus name '{corpus}' must be lowercase alphanumeric"
            )));
        }
        Ok(CorpusId {
            language: language.to_string(),
            framework,
            corpus: corpus.to_string(),
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn framework(&self) -> Framework {
        self.framework
    }

    pub fn corpus(&self) -> &str {
        &self.corpus
    }

    /// Whether the id belongs to the 2025 shared-task corpus inventory.
    pub fn is_known(&self) -> bool {
        let rendered = self.to_string();
        KNOWN_CORPORA.contains(&rendered.as_str())
    }

    /// Guess the corpus from a DISRPT-style file name such as
    /// `eng.erst.gum_train.rels`.
    pub fn from_file_name(name: &str) -> Option<CorpusId> {
        let stem = name.rsplit(['/', '\\']).next().unwrap_or(name);
        let head = stem.split('_').next()?;
        let mut parts = head.splitn(4, '.');
        let (l, f, c) = (parts.next()?, parts.next()?, parts.next()?);
        CorpusId::new(l, f.parse().ok()?, c).ok()
    }
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.language, self.framework, self.corpus)
    }
}

impl FromStr for CorpusId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split('.').collect();
        match parts.as_slice() {
            [l, f, c] => CorpusId::new(l, f.parse()?, c),
            _ => Err(CorpusError::BadCorpusId(format!(
                "'{s}' is not of the form language.framework.corpus"
            ))),
        }
    }
}

impl Serialize for CorpusId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CorpusId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The DISRPT 2025 corpus inventory. `fra.sdrt.summre` is part of the
/// benchmark but not of the relation classification track.
pub const KNOWN_CORPORA: [&str; 39] = [
    "ces.rst.crdt",
    "deu.pdtb.pcc",
    "deu.rst.pcc",
    "eng.dep.covdtb",
    "eng.dep.scidtb",
    "eng.erst.gentle",
    "eng.erst.gum",
    "eng.pdtb.gentle",
    "eng.pdtb.gum",
    "eng.pdtb.pdtb",
    "eng.pdtb.tedm",
    "eng.rst.oll",
    "eng.rst.rstdt",
    "eng.rst.sts",
    "eng.rst.umuc",
    "eng.sdrt.msdc",
    "eng.sdrt.stac",
    "eus.rst.ert",
    "fas.rst.prstc",
    "fra.sdrt.annodis",
    "fra.sdrt.summre",
    "ita.pdtb.luna",
    "nld.rst.nldt",
    "pcm.pdtb.disconaija",
    "pol.iso.pdc",
    "por.pdtb.crpc",
    "por.pdtb.tedm",
    "por.rst.cstn",
    "rus.rst.rrt",
    "spa.rst.rststb",
    "spa.rst.sctb",
    "tha.pdtb.tdtb",
    "tur.pdtb.tdb",
    "tur.pdtb.tedm",
    "zho.dep.scidtb",
    "zho.pdtb.cdtb",
    "zho.pdtb.ted",
    "zho.rst.gcdt",
    "zho.rst.sctb",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders() {
        let id: CorpusId = "zho.rst.gcdt".parse().unwrap();
        assert_eq!(id.language(), "zho");
        assert_eq!(id.framework(), Framework::Rst);
        assert_eq!(id.corpus(), "gcdt");
        assert_eq!(id.to_string(), "zho.rst.gcdt");
        assert!(id.is_known());
    }

    #[test]
    fn whole_inventory_parses() {
        for name in KNOWN_CORPORA {
            let id: CorpusId = name.parse().unwrap();
            assert_eq!(id.to_string(), name);
        }
    }

    #[test]
    fn rejects_bad_ids() {
        assert!("eng.xyz.gum".parse::<CorpusId>().is_err());
        assert!("en.rst.gum".parse::<CorpusId>().is_err());
        assert!("ENG.rst.gum".parse::<CorpusId>().is_err());
        assert!("eng.rst".parse::<CorpusId>().is_err());
        assert!("eng.rst.gum.x".parse::<CorpusId>().is_err());
    }

    #[test]
    fn from_file_name() {
        let id = CorpusId::from_file_name("data/eng.erst.gum_train.rels").unwrap();
        assert_eq!(id.to_string(), "eng.erst.gum");
        assert!(CorpusId::from_file_name("train.rels").is_none());
    }
}
