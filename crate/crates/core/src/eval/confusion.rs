use std::collections::BTreeSet;

use super::Confusion;
use crate::corpus::LabelInventory;

/// Rows are gold labels, columns predicted labels, both in inventory order
/// with any out-of-inventory labels appended alphabetically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// Each row divided by its sum; rows of absent gold labels stay zero.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if sum == 0 { 0.0 } else { c as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }

    fn tsv<T>(&self, rows: &[Vec<T>], cell: impl Fn(&T) -> String) -> String {
        let mut out = format!("gold\\pred\t{}\n", self.labels.join("\t"));
        for (label, row) in self.labels.iter().zip(rows) {
            let cells: Vec<String> = row.iter().map(&cell).collect();
            out.push_str(&format!("{label}\t{}\n", cells.join("\t")));
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        self.tsv(&self.counts, |c| c.to_string())
    }

    pub fn to_normalized_tsv(&self) -> String {
        self.tsv(&self.normalized(), |v| format!("{v:.4}"))
    }
}

pub fn confusion_to_matrix(confusion: &Confusion, inv: &LabelInventory) -> ConfusionMatrix {
    let mut labels: Vec<String> = inv.labels().to_vec();
    let extra: BTreeSet<&String> = confusion
        .iter()
        .flat_map(|(g, row)| std::iter::once(g).chain(row.keys()))
        .filter(|l| !inv.contains(l))
        .collect();
    labels.extend(extra.into_iter().cloned());
    let counts = labels
        .iter()
        .map(|g| {
            labels
                .iter()
                .map(|p| confusion.get(g).and_then(|row| row.get(p)).copied().unwrap_or(0))
                .collect()
        })
        .collect();
    ConfusionMatrix { labels, counts }
}
