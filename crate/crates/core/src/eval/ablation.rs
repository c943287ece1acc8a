use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{pct, EvalError, EvalReport};
use crate::corpus::CorpusId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// Corpus code, or `macro_avg` / `micro_avg` for the aggregate rows.
    pub name: String,
    pub baseline: f64,
    pub ablated: f64,
    pub gain: f64,
}

impl AblationRow {
    fn new(name: String, baseline: f64, ablated: f64) -> Self {
        AblationRow {
            name,
            baseline,
            ablated,
            gain: baseline - ablated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
    pub macro_row: AblationRow,
    pub micro_row: Option<AblationRow>,
}

impl AblationTable {
    /// Columns: corpus, baseline, abs, gain.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("corpus\tbaseline\tabs\tgain\n");
        for r in self.rows.iter().chain([&self.macro_row]).chain(&self.micro_row) {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.name, pct(r.baseline), pct(r.ablated), pct(r.gain)));
        }
        out
    }
}

/// Per-corpus gains plus aggregate rows. Aggregate gains are differences of
/// the aggregated accuracies, not averages of the per-corpus gains.
pub fn ablation_report(baseline: &EvalReport, ablated: &EvalReport) -> Result<AblationTable, EvalError> {
    let b: BTreeSet<&CorpusId> = baseline.per_corpus.keys().collect();
    let a: BTreeSet<&CorpusId> = ablated.per_corpus.keys().collect();
    if a != b {
        return Err(EvalError::CorpusSetMismatch {
            only_baseline: b.difference(&a).map(|c| (*c).clone()).collect(),
            only_ablated: a.difference(&b).map(|c| (*c).clone()).collect(),
        });
    }
    let rows = baseline
        .per_corpus
        .iter()
        .map(|(c, r)| AblationRow::new(c.to_string(), r.accuracy, ablated.per_corpus[c].accuracy))
        .collect();
    let micro_row = match (baseline.micro_avg, ablated.micro_avg) {
        (Some(x), Some(y)) => Some(AblationRow::new("micro_avg".into(), x, y)),
        _ => None,
    };
    Ok(AblationTable {
        rows,
        macro_row: AblationRow::new("macro_avg".into(), baseline.macro_avg, ablated.macro_avg),
        micro_row,
    })
}
