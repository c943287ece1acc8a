use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::corpus::CorpusId;

const DEFAULT_MAPPINGS: &str = include_str!("../../config/augmentation.tsv");

pub const DEFAULT_RATIO: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenreFilter {
    All,
    Only(Vec<String>),
}

impl GenreFilter {
    pub fn admits(&self, genre: &str) -> bool {
        match self {
            GenreFilter::All => true,
            GenreFilter::Only(gs) => gs.iter().any(|g| g.eq_ignore_ascii_case(genre)),
        }
    }
}

/// Which English corpora feed a low-resource target, and under which genre
/// and structural restrictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationMapping {
    pub target: CorpusId,
    pub sources: Vec<CorpusId>,
    pub genres: GenreFilter,
    pub ratio: f64,
    /// Structural predicate names applied to source instances.
    pub filters: Vec<String>,
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

pub fn parse_mappings(text: &str) -> Result<Vec<AugmentationMapping>, AugmentError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |message: String| AugmentError::BadMapping {
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if !(3..=5).contains(&cols.len()) {
            return Err(bad(format!("expected 3 to 5 columns, found {}", cols.len())));
        }
        let target: CorpusId = cols[0].parse().map_err(|e| bad(format!("{e}")))?;
        let sources = split_list(cols[1])
            .map(|s| s.parse::<CorpusId>().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if sources.is_empty() {
            return Err(bad("no source corpora".into()));
        }
        let genres = if cols[2].eq_ignore_ascii_case("all") || cols[2] == "*" {
            GenreFilter::All
        } else {
            let gs: Vec<String> = split_list(cols[2]).map(str::to_lowercase).collect();
            if gs.is_empty() {
                return Err(bad("empty genre list".into()));
            }
            GenreFilter::Only(gs)
        };
        let ratio = match cols.get(3) {
            Some(r) if !r.is_empty() && *r != "-" => r
                .parse::<f64>()
                .map_err(|_| bad(format!("bad ratio '{r}'")))?,
            _ => DEFAULT_RATIO,
        };
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(bad(format!("ratio {ratio} outside (0, 1]")));
        }
        let filters = match cols.get(4) {
            Some(f) if *f != "-" => split_list(f).map(str::to_string).collect(),
            _ => Vec::new(),
        };
        out.push(AugmentationMapping {
            target,
            sources,
            genres,
            ratio,
            filters,
        });
    }
    Ok(out)
}

pub fn load_mappings(path: &Path) -> Result<Vec<AugmentationMapping>, AugmentError> {
    let text = std::fs::read_to_string(path).map_err(|e| AugmentError::io(path, e))?;
    parse_mappings(&text)
}

/// The seven bundled source/target mappings.
pub fn default_mappings() -> Vec<AugmentationMapping> {
    parse_mappings(DEFAULT_MAPPINGS).expect("bundled mapping file is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn german_rst_row() {
        let maps = default_mappings();
        let pcc = maps
            .iter()
            .find(|m| m.target.to_string() == "deu.rst.pcc")
            .unwrap();
        assert_eq!(pcc.sources, vec!["eng.erst.gum".parse::<CorpusId>().unwrap()]);
        assert_eq!(
            pcc.genres,
            GenreFilter::Only(vec!["essay".into(), "news".into(), "speech".into()])
        );
        assert_eq!(pcc.ratio, 0.75);
        assert_eq!(pcc.filters, vec!["relative_clause_unit".to_string()]);
        assert!(pcc.genres.admits("News"));
        assert!(!pcc.genres.admits("reddit"));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_mappings("deu.rst.pcc\teng.erst.gum\n").is_err());
        assert!(parse_mappings("deu.rst.pcc\teng.erst.gum\tnews\t1.5\n").is_err());
        assert!(parse_mappings("deu.rst.pcc\teng.erst.gum\tnews\t0\n").is_err());
        assert!(parse_mappings("deu.rst.pcc\t\tnews\n").is_err());
    }

    #[test]
    fn ratio_defaults() {
        let m = parse_mappings("deu.rst.pcc\teng.erst.gum\tall\n").unwrap();
        assert_eq!(m[0].ratio, DEFAULT_RATIO);
        assert_eq!(m[0].genres, GenreFilter::All);
    }
}
