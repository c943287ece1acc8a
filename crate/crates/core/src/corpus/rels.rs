use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CorpusError, CorpusId, LabelInventory, TokenSpanSet};

pub const REQUIRED_COLUMNS: [&str; 7] = [
    "doc",
    "unit1_toks",
    "unit2_toks",
    "unit1_txt",
    "unit2_txt",
    "dir",
    "label",
];

/// Column layout written when no other header is requested.
pub const DEFAULT_HEADER: [&str; 12] = [
    "doc",
    "unit1_toks",
    "unit2_toks",
    "unit1_txt",
    "unit2_txt",
    "s1_toks",
    "s2_toks",
    "unit1_sent",
    "unit2_sent",
    "dir",
    "orig_label",
    "label",
];

const TEXT_COLUMNS: [&str; 4] = ["unit1_txt", "unit2_txt", "unit1_sent", "unit2_sent"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `1>2`
    #[serde(rename = "1>2")]
    Forward,
    /// `1<2`
    #[serde(rename = "1<2")]
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "1>2",
            Direction::Backward => "1<2",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim() {
            "1>2" => Ok(Direction::Forward),
            "1<2" => Ok(Direction::Backward),
            _ => Err(()),
        }
    }
}

/// One row of a `.rels` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationInstance {
    /// Ordinal of the row within its file, starting at 0.
    pub instance_id: usize,
    pub doc_id: String,
    pub unit1_text: String,
    pub unit2_text: String,
    pub unit1_spans: TokenSpanSet,
    pub unit2_spans: TokenSpanSet,
    pub sent1_text: String,
    pub sent2_text: String,
    pub sent1_spans: Option<TokenSpanSet>,
    pub sent2_spans: Option<TokenSpanSet>,
    pub direction: Direction,
    /// Lowercased relation label.
    pub label: String,
    pub orig_label: Option<String>,
    /// False when the label is not in the inventory the file was parsed with.
    pub label_known: bool,
    /// Columns the toolkit does not interpret, keyed by header name.
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RelsWarning {
    UnknownLabel { line: usize, label: String },
    Sanitized { instance_id: usize, column: String },
}

impl fmt::Display for RelsWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelsWarning::UnknownLabel { line, label } => {
                write!(f, "line {line}: label '{label}' is not in the inventory")
            }
            RelsWarning::Sanitized {
                instance_id,
                column,
            } => write!(
                f,
                "instance {instance_id}: tab or newline in '{column}' replaced by a space"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParsedRels {
    pub corpus: CorpusId,
    pub header: Vec<String>,
    pub instances: Vec<RelationInstance>,
    pub warnings: Vec<RelsWarning>,
}

pub fn parse_rels(
    path: &Path,
    corpus: &CorpusId,
    inventory: &LabelInventory,
) -> Result<ParsedRels, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_rels_str(&text, corpus, inventory)
}

pub fn parse_rels_str(
    text: &str,
    corpus: &CorpusId,
    inventory: &LabelInventory,
) -> Result<ParsedRels, CorpusError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    let header: Vec<String> = match lines.next() {
        Some((_, h)) if !h.trim().is_empty() => h
            .trim_end_matches('\r')
            .split('\t')
            .map(|c| c.trim().to_string())
            .collect(),
        _ => return Err(CorpusError::MissingHeader),
    };
    let columns: HashMap<&str, usize> = header
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    for required in REQUIRED_COLUMNS {
        if !columns.contains_key(required) {
            return Err(CorpusError::MissingColumn(required.to_string()));
        }
    }
    let col = |name: &str| columns.get(name).copied();
    let known: Vec<&str> = DEFAULT_HEADER.to_vec();

    let mut instances = Vec::new();
    let mut warnings = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != header.len() {
            return Err(CorpusError::FieldCount {
                line: line_no,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let get = |name: &str| col(name).map(|i| fields[i]);
        let span = |name: &str| -> Result<TokenSpanSet, CorpusError> {
            let value = get(name).unwrap_or("");
            value.parse().map_err(|_| CorpusError::BadSpan {
                line: line_no,
                column: name.to_string(),
                value: value.to_string(),
            })
        };
        let opt_span = |name: &str| -> Result<Option<TokenSpanSet>, CorpusError> {
            match get(name) {
                None => Ok(None),
                Some(v) if v.trim().is_empty() || v.trim() == "_" => Ok(None),
                Some(_) => span(name).map(Some),
            }
        };
        let dir_value = get("dir").unwrap_or("");
        let direction = dir_value
            .parse::<Direction>()
            .map_err(|_| CorpusError::BadDirection {
                line: line_no,
                value: dir_value.to_string(),
            })?;
        let raw_label = get("label").unwrap_or("");
        let label = raw_label.trim().to_lowercase();
        let label_known = inventory.contains(&label);
        if !label_known {
            warnings.push(RelsWarning::UnknownLabel {
                line: line_no,
                label: label.clone(),
            });
        }
        let extra = header
            .iter()
            .enumerate()
            .filter(|(_, name)| !known.contains(&name.as_str()))
            .map(|(i, name)| (name.clone(), fields[i].to_string()))
            .collect();
        instances.push(RelationInstance {
            instance_id: instances.len(),
            doc_id: get("doc").unwrap_or("").to_string(),
            unit1_text: get("unit1_txt").unwrap_or("").to_string(),
            unit2_text: get("unit2_txt").unwrap_or("").to_string(),
            unit1_spans: span("unit1_toks")?,
            unit2_spans: span("unit2_toks")?,
            sent1_text: get("unit1_sent").unwrap_or("").to_string(),
            sent2_text: get("unit2_sent").unwrap_or("").to_string(),
            sent1_spans: opt_span("s1_toks")?,
            sent2_spans: opt_span("s2_toks")?,
            direction,
            label,
            orig_label: get("orig_label")
                .filter(|v| *v != "_")
                .map(str::to_string),
            label_known,
            extra,
        });
    }
    Ok(ParsedRels {
        corpus: corpus.clone(),
        header,
        instances,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct SerializedRels {
    pub bytes: Vec<u8>,
    pub warnings: Vec<RelsWarning>,
}

fn sanitize(value: &str) -> (String, bool) {
    if value.contains(['\t', '\n', '\r']) {
        (value.replace(['\t', '\n', '\r'], " "), true)
    } else {
        (value.to_string(), false)
    }
}

/// Writes instances in `.rels` layout using the given column order.
///
/// Tabs and newlines inside text fields become single spaces; each
/// replacement is reported as a warning.
pub fn serialize_rels<S: AsRef<str>>(
    instances: &[RelationInstance],
    header: &[S],
) -> SerializedRels {
    let header: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
    let mut out = header.join("\t");
    out.push('\n');
    let mut warnings = Vec::new();
    for inst in instances {
        let mut row = Vec::with_capacity(header.len());
        for &column in &header {
            let value = match column {
                "doc" => inst.doc_id.clone(),
                "unit1_toks" => inst.unit1_spans.to_string(),
                "unit2_toks" => inst.unit2_spans.to_string(),
                "unit1_txt" => inst.unit1_text.clone(),
                "unit2_txt" => inst.unit2_text.clone(),
                "s1_toks" => span_or_placeholder(&inst.sent1_spans),
                "s2_toks" => span_or_placeholder(&inst.sent2_spans),
                "unit1_sent" => inst.sent1_text.clone(),
                "unit2_sent" => inst.sent2_text.clone(),
                "dir" => inst.direction.to_string(),
                "orig_label" => inst.orig_label.clone().unwrap_or_else(|| "_".into()),
                "label" => inst.label.clone(),
                other => inst.extra.get(other).cloned().unwrap_or_else(|| "_".into()),
            };
            let (value, changed) = sanitize(&value);
            if changed {
                if !TEXT_COLUMNS.contains(&column) {
                    log::warn!("instance {}: sanitized non-text column {column}", inst.instance_id);
                }
                warnings.push(RelsWarning::Sanitized {
                    instance_id: inst.instance_id,
                    column: column.to_string(),
                });
            }
            row.push(value);
        }
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    SerializedRels {
        bytes: out.into_bytes(),
        warnings,
    }
}

fn span_or_placeholder(span: &Option<TokenSpanSet>) -> String {
    span.as_ref()
        .map(ToString::to_string)
        .unwrap_or_else(|| "_".into())
}
