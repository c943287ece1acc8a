use std::collections::{BTreeMap, HashMap};

use crate::corpus::{Direction, Framework, RelationInstance, TokenSpanSet};

/// Ordered inventory of the discourse units mentioned by one document's
/// relation rows, with per-unit child counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitInventory {
    units: Vec<TokenSpanSet>,
    children: HashMap<TokenSpanSet, usize>,
    degenerate: bool,
}

impl UnitInventory {
    /// Builds the inventory from the rows of `doc_id`. The inventory counts as
    /// degenerate for shallow (connective-anchored) frameworks and whenever
    /// two distinct units overlap, since neither is a segmentation.
    pub fn build(doc_id: &str, rows: &[RelationInstance], framework: Framework) -> Self {
        let mut children: HashMap<TokenSpanSet, usize> = HashMap::new();
        let mut units: Vec<TokenSpanSet> = Vec::new();
        for row in rows.iter().filter(|r| r.doc_id == doc_id) {
            units.push(row.unit1_spans.clone());
            units.push(row.unit2_spans.clone());
            let head = match row.direction {
                Direction::Forward => &row.unit2_spans,
                Direction::Backward => &row.unit1_spans,
            };
            *children.entry(head.clone()).or_default() += 1;
        }
        units.sort();
        units.dedup();
        let overlapping = units
            .iter()
            .enumerate()
            .any(|(i, a)| units[i + 1..].iter().any(|b| a.overlaps(b)));
        UnitInventory {
            units,
            children,
            degenerate: framework.is_shallow() || overlapping,
        }
    }

    /// One inventory per document id appearing in `rows`.
    pub fn per_document(
        rows: &[RelationInstance],
        framework: Framework,
    ) -> BTreeMap<String, UnitInventory> {
        let mut by_doc: BTreeMap<String, Vec<RelationInstance>> = BTreeMap::new();
        for r in rows {
            by_doc.entry(r.doc_id.clone()).or_default().push(r.clone());
        }
        by_doc
            .into_iter()
            .map(|(doc, rs)| {
                let inv = UnitInventory::build(&doc, &rs, framework);
                (doc, inv)
            })
            .collect()
    }

    pub fn units(&self) -> &[TokenSpanSet] {
        &self.units
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn position(&self, unit: &TokenSpanSet) -> Option<usize> {
        self.units.binary_search(unit).ok()
    }

    pub fn children(&self, unit: &TokenSpanSet) -> usize {
        self.children.get(unit).copied().unwrap_or(0)
    }

    /// Number of inventory units strictly between `a` and `b`.
    pub fn units_between(&self, a: &TokenSpanSet, b: &TokenSpanSet) -> Option<usize> {
        let (pa, pb) = (self.position(a)?, self.position(b)?);
        Some(pa.abs_diff(pb).saturating_sub(1))
    }
}
