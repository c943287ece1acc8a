use std::collections::BTreeSet;

use super::{AugmentError, AugmentationMapping};
use crate::corpus::RelationInstance;

pub const DEFAULT_RELATIVE_PRONOUNS: [&str; 5] = ["which", "who", "that", "whose", "whom"];

/// A named structural pattern; an instance matching any predicate is excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// Either unit opens with a relative pronoun. Approximates "this unit is a
    /// relative clause" without a parser.
    RelativeClauseUnit { pronouns: BTreeSet<String> },
}

impl Predicate {
    pub fn name(&self) -> &'static str {
        match self {
            Predicate::RelativeClauseUnit { .. } => "relative_clause_unit",
        }
    }

    pub fn from_name<S: AsRef<str>>(name: &str, pronouns: &[S]) -> Result<Self, AugmentError> {
        match name {
            "relative_clause_unit" => Ok(Predicate::RelativeClauseUnit {
                pronouns: pronouns.iter().map(|p| p.as_ref().to_lowercase()).collect(),
            }),
            other => Err(AugmentError::UnknownPredicate(other.to_string())),
        }
    }

    pub fn fires(&self, inst: &RelationInstance) -> bool {
        match self {
            Predicate::RelativeClauseUnit { pronouns } => [&inst.unit1_text, &inst.unit2_text]
                .into_iter()
                .filter_map(|t| first_word(t))
                .any(|w| pronouns.contains(&w)),
        }
    }
}

/// First whitespace token carrying a letter or digit, trimmed of surrounding
/// punctuation and case-folded.
fn first_word(text: &str) -> Option<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .find(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn predicates_for(mapping: &AugmentationMapping) -> Result<Vec<Predicate>, AugmentError> {
    mapping
        .filters
        .iter()
        .map(|n| Predicate::from_name(n, &DEFAULT_RELATIVE_PRONOUNS))
        .collect()
}

/// True iff no predicate fires on `inst`.
pub fn structural_filter(inst: &RelationInstance, predicates: &[Predicate]) -> bool {
    !predicates.iter().any(|p| p.fires(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Direction, TokenSpanSet};

    fn inst(u1: &str, u2: &str) -> RelationInstance {
        RelationInstance {
            instance_id: 0,
            doc_id: "d".into(),
            unit1_text: u1.into(),
            unit2_text: u2.into(),
            unit1_spans: TokenSpanSet::contiguous(1, 2).unwrap(),
            unit2_spans: TokenSpanSet::contiguous(3, 4).unwrap(),
            sent1_text: String::new(),
            sent2_text: String::new(),
            sent1_spans: None,
            sent2_spans: None,
            direction: Direction::Forward,
            label: "elaboration".into(),
            orig_label: None,
            label_known: true,
            extra: Default::default(),
        }
    }

    fn relative() -> Vec<Predicate> {
        vec![Predicate::from_name("relative_clause_unit", &DEFAULT_RELATIVE_PRONOUNS).unwrap()]
    }

    #[test]
    fn relative_clause_excluded() {
        assert!(!structural_filter(&inst("which was built in 1990", "x"), &relative()));
        assert!(!structural_filter(&inst("The plant", ", Who knew"), &relative()));
    }

    #[test]
    fn ordinary_unit_retained() {
        assert!(structural_filter(&inst("The plant opened in 1990", "and closed later"), &relative()));
    }

    #[test]
    fn empty_predicate_list() {
        assert!(structural_filter(&inst("which", "who"), &[]));
    }

    #[test]
    fn unknown_predicate() {
        assert!(matches!(
            Predicate::from_name("passive_voice", &DEFAULT_RELATIVE_PRONOUNS),
            Err(AugmentError::UnknownPredicate(n)) if n == "passive_voice"
        ));
    }
}
