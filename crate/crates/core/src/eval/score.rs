use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{pct, EvalError};
use crate::corpus::{CorpusId, RelationInstance};

/// Gold label to predicted label to count.
pub type Confusion = BTreeMap<String, BTreeMap<String, usize>>;

pub const SCORE_TABLE_HEADER: &str = "corpus\taccuracy\tcorrect\ttotal";

#[derive(Debug, Clone, PartialEq, Eq)]
struct PredRow {
    id: Option<usize>,
    label: String,
}

/// Predicted labels, either one per line or as `id<TAB>label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionFile {
    rows: Vec<PredRow>,
}

impl PredictionFile {
    pub fn positional<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        PredictionFile {
            rows: labels
                .into_iter()
                .map(|l| PredRow {
                    id: None,
                    label: l.into(),
                })
                .collect(),
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, EvalError> {
        let bad = |line: usize, message: String| EvalError::BadFile {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut rows = Vec::new();
        let mut with_ids: Option<bool> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let row = match line.split_once('\t') {
                Some((id, label)) => match id.trim().parse::<usize>() {
                    Ok(id) => PredRow {
                        id: Some(id),
                        label: label.to_string(),
                    },
                    Err(_) if rows.is_empty() && with_ids.is_none() => {
                        // Header row such as "id<TAB>label".
                        with_ids = Some(true);
                        continue;
                    }
                    Err(_) => return Err(bad(i + 1, format!("bad instance id '{id}'"))),
                },
                None => PredRow {
                    id: None,
                    label: line.to_string(),
                },
            };
            match with_ids {
                Some(w) if w != row.id.is_some() => {
                    return Err(bad(i + 1, "mixes id and positional rows".into()))
                }
                _ => with_ids = Some(row.id.is_some()),
            }
            rows.push(row);
        }
        Ok(PredictionFile { rows })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn raw_labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn has_ids(&self) -> bool {
        self.rows.first().is_some_and(|r| r.id.is_some())
    }

    /// Raw predictions in gold order. Id files must cover exactly the gold ids.
    pub fn align(&self, corpus: &CorpusId, gold: &[RelationInstance]) -> Result<Vec<String>, EvalError> {
        if self.rows.len() != gold.len() {
            return Err(EvalError::LengthMismatch {
                corpus: corpus.clone(),
                gold: gold.len(),
                pred: self.rows.len(),
            });
        }
        if !self.has_ids() {
            return Ok(self.rows.iter().map(|r| r.label.clone()).collect());
        }
        let mut by_id: BTreeMap<usize, &str> = BTreeMap::new();
        for r in &self.rows {
            let id = r.id.expect("id file");
            if by_id.insert(id, &r.label).is_some() {
                return Err(EvalError::IdMismatch {
                    corpus: corpus.clone(),
                    id,
                });
            }
        }
        gold.iter()
            .map(|g| {
                by_id
                    .get(&g.instance_id)
                    .map(|l| l.to_string())
                    .ok_or_else(|| EvalError::IdMismatch {
                        corpus: corpus.clone(),
                        id: g.instance_id,
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusScore {
    pub corpus: CorpusId,
    pub correct: usize,
    pub total: usize,
    /// Unrounded percentage.
    pub accuracy: f64,
    pub confusion: Confusion,
}

impl CorpusScore {
    pub fn result(&self) -> CorpusResult {
        CorpusResult {
            accuracy: self.accuracy,
            correct: Some(self.correct),
            total: Some(self.total),
        }
    }
}

/// `pred` must already be repaired and aligned with `gold`.
pub fn score_corpus<S: AsRef<str>>(
    corpus: &CorpusId,
    gold: &[RelationInstance],
    pred: &[S],
) -> Result<CorpusScore, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            corpus: corpus.clone(),
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyCorpus(corpus.clone()));
    }
    let mut confusion = Confusion::new();
    let mut correct = 0;
    for (g, p) in gold.iter().zip(pred) {
        let p = p.as_ref();
        if g.label == p {
            correct += 1;
        }
        *confusion
            .entry(g.label.clone())
            .or_default()
            .entry(p.to_string())
            .or_default() += 1;
    }
    Ok(CorpusScore {
        corpus: corpus.clone(),
        correct,
        total: gold.len(),
        accuracy: 100.0 * correct as f64 / gold.len() as f64,
        confusion,
    })
}

/// Per-corpus accuracy; counts are absent when only a reported percentage
/// is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusResult {
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub macro_avg: f64,
    /// Needs counts for every corpus.
    pub micro_avg: Option<f64>,
}

pub fn aggregate<'a>(results: impl IntoIterator<Item = &'a CorpusResult>) -> Result<Aggregate, EvalError> {
    let (mut n, mut sum_acc) = (0usize, 0.0);
    let (mut correct, mut total) = (0usize, 0usize);
    let mut counted = true;
    for r in results {
        n += 1;
        sum_acc += r.accuracy;
        match (r.correct, r.total) {
            (Some(c), Some(t)) => {
                correct += c;
                total += t;
            }
            _ => counted = false,
        }
    }
    if n == 0 {
        return Err(EvalError::NoCorpora);
    }
    Ok(Aggregate {
        macro_avg: sum_acc / n as f64,
        micro_avg: (counted && total > 0).then(|| 100.0 * correct as f64 / total as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_corpus: BTreeMap<CorpusId, CorpusResult>,
    pub macro_avg: f64,
    pub micro_avg: Option<f64>,
    #[serde(default)]
    pub confusion: Confusion,
    #[serde(default)]
    pub repair_seed: Option<u64>,
    #[serde(default)]
    pub repairs: usize,
}

impl EvalReport {
    pub fn from_results(per_corpus: BTreeMap<CorpusId, CorpusResult>) -> Result<Self, EvalError> {
        let agg = aggregate(per_corpus.values())?;
        Ok(EvalReport {
            per_corpus,
            macro_avg: agg.macro_avg,
            micro_avg: agg.micro_avg,
            confusion: Confusion::new(),
            repair_seed: None,
            repairs: 0,
        })
    }

    pub fn from_scores(scores: &[CorpusScore], repair_seed: Option<u64>, repairs: usize) -> Result<Self, EvalError> {
        let mut report = Self::from_results(scores.iter().map(|s| (s.corpus.clone(), s.result())).collect())?;
        for s in scores {
            add_confusion(&mut report.confusion, &s.confusion);
        }
        report.repair_seed = repair_seed;
        report.repairs = repairs;
        Ok(report)
    }

    /// Combines reports over disjoint corpus sets and recomputes averages.
    pub fn merge(reports: Vec<EvalReport>) -> Result<Self, EvalError> {
        let mut per_corpus = BTreeMap::new();
        let mut confusion = Confusion::new();
        let mut repairs = 0;
        let mut seeds = BTreeSet::new();
        for r in reports {
            for (c, v) in r.per_corpus {
                if per_corpus.insert(c.clone(), v).is_some() {
                    return Err(EvalError::BadFile {
                        path: c.to_string().into(),
                        line: 0,
                        message: "corpus scored more than once".into(),
                    });
                }
            }
            add_confusion(&mut confusion, &r.confusion);
            repairs += r.repairs;
            seeds.extend(r.repair_seed);
        }
        let mut merged = Self::from_results(per_corpus)?;
        merged.confusion = confusion;
        merged.repairs = repairs;
        merged.repair_seed = if seeds.len() == 1 { seeds.pop_first() } else { None };
        Ok(merged)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| EvalError::BadFile {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// `corpus accuracy correct total` lines followed by the averages.
    pub fn score_table(&self) -> String {
        let mut out = format!("{SCORE_TABLE_HEADER}\n");
        let opt = |v: Option<usize>| v.map_or("_".to_string(), |v| v.to_string());
        for (c, r) in &self.per_corpus {
            out.push_str(&format!("{c}\t{}\t{}\t{}\n", pct(r.accuracy), opt(r.correct), opt(r.total)));
        }
        out
    }

    pub fn parse_score_table(text: &str, path: &Path) -> Result<Self, EvalError> {
        let bad = |line: usize, message: String| EvalError::BadFile {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.starts_with("corpus\taccuracy") => {}
            _ => return Err(bad(1, format!("expected header '{SCORE_TABLE_HEADER}'"))),
        }
        let mut per_corpus = BTreeMap::new();
        for (i, raw) in lines {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 && cols.len() != 4 {
                return Err(bad(i + 1, format!("expected 2 or 4 columns, found {}", cols.len())));
            }
            let corpus: CorpusId = cols[0].parse().map_err(|e| bad(i + 1, format!("{e}")))?;
            let accuracy: f64 = cols[1]
                .parse()
                .map_err(|_| bad(i + 1, format!("bad accuracy '{}'", cols[1])))?;
            let count = |s: Option<&&str>| -> Result<Option<usize>, EvalError> {
                match s {
                    None | Some(&"_") => Ok(None),
                    Some(v) => v.parse().map(Some).map_err(|_| bad(i + 1, format!("bad count '{v}'"))),
                }
            };
            let result = CorpusResult {
                accuracy,
                correct: count(cols.get(2))?,
                total: count(cols.get(3))?,
            };
            if per_corpus.insert(corpus, result).is_some() {
                return Err(bad(i + 1, "duplicate corpus".into()));
            }
        }
        Self::from_results(per_corpus)
    }
}

fn add_confusion(into: &mut Confusion, from: &Confusion) {
    for (g, row) in from {
        let dst = into.entry(g.clone()).or_default();
        for (p, n) in row {
            *dst.entry(p.clone()).or_default() += n;
        }
    }
}

/// Merges every `*.json` report and every `*.tsv` score table in `dir`, in
/// file name order. Other TSV files, such as confusion matrices, are skipped.
pub fn load_report_dir(dir: &Path) -> Result<EvalReport, EvalError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| EvalError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut reports = Vec::new();
    for p in paths {
        match p.extension().and_then(|e| e.to_str()) {
            Some("json") => reports.push(EvalReport::load(&p)?),
            Some("tsv") => {
                let text = std::fs::read_to_string(&p).map_err(|e| EvalError::io(&p, e))?;
                if text.starts_with("corpus\taccuracy") {
                    reports.push(EvalReport::parse_score_table(&text, &p)?);
                } else {
                    log::debug!("{}: not a score table, skipped", p.display());
                }
            }
            _ => {}
        }
    }
    if reports.is_empty() {
        return Err(EvalError::NoCorpora);
    }
    EvalReport::merge(reports)
}
