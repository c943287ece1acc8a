use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BuildError, EncoderRecord, PromptRecord};
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Jsonl,
    Tsv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "tsv" => Ok(OutputFormat::Tsv),
            _ => Err(format!("unknown output format '{s}' (expected jsonl or tsv)")),
        }
    }
}

/// A record that can be written as one output line.
pub trait ModelRecord {
    /// Name of the text column: `prompt` or `input`.
    const TEXT_FIELD: &'static str;

    fn line(&self) -> RecordLine;
}

/// Format-neutral view of an emitted line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordLine {
    pub id: usize,
    pub text: String,
    pub target: String,
    pub corpus: String,
}

impl ModelRecord for PromptRecord {
    const TEXT_FIELD: &'static str = "prompt";

    fn line(&self) -> RecordLine {
        RecordLine {
            id: self.instance_id,
            text: self.prompt.clone(),
            target: self.target.clone(),
            corpus: self.corpus.to_string(),
        }
    }
}

impl ModelRecord for EncoderRecord {
    const TEXT_FIELD: &'static str = "input";

    fn line(&self) -> RecordLine {
        RecordLine {
            id: self.instance_id,
            text: self.input.clone(),
            target: self.target.clone(),
            corpus: self.corpus.to_string(),
        }
    }
}

#[derive(Serialize)]
struct PromptJson<'a> {
    id: usize,
    prompt: &'a str,
    target: &'a str,
    corpus: &'a str,
}

#[derive(Serialize)]
struct InputJson<'a> {
    id: usize,
    input: &'a str,
    target: &'a str,
    corpus: &'a str,
}

#[derive(Deserialize)]
struct AnyJson {
    id: usize,
    #[serde(alias = "input")]
    prompt: String,
    target: String,
    corpus: String,
}

fn escape_tsv(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_tsv(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Renders records to the chosen format. JSON lines carry the fields
/// `id`, `prompt`/`input`, `target`, `corpus` in that order; TSV adds a header.
pub fn render_records<R: ModelRecord>(records: &[R], format: OutputFormat) -> String {
    let mut out = String::new();
    if format == OutputFormat::Tsv {
        out.push_str(&format!("id\t{}\ttarget\tcorpus\n", R::TEXT_FIELD));
    }
    for r in records {
        let l = r.line();
        match format {
            OutputFormat::Jsonl => {
                let json = if R::TEXT_FIELD == "prompt" {
                    serde_json::to_string(&PromptJson {
                        id: l.id,
                        prompt: &l.text,
                        target: &l.target,
                        corpus: &l.corpus,
                    })
                } else {
                    serde_json::to_string(&InputJson {
                        id: l.id,
                        input: &l.text,
                        target: &l.target,
                        corpus: &l.corpus,
                    })
                };
                out.push_str(&json.expect("string fields always serialize"));
            }
            OutputFormat::Tsv => out.push_str(&format!(
                "{}\t{}\t{}\t{}",
                l.id,
                escape_tsv(&l.text),
                escape_tsv(&l.target),
                escape_tsv(&l.corpus)
            )),
        }
        out.push('\n');
    }
    out
}

pub fn emit_records<R: ModelRecord>(
    records: &[R],
    format: OutputFormat,
    path: &Path,
) -> Result<(), BuildError> {
    write_atomic(path, render_records(records, format).as_bytes())
        .map_err(|e| BuildError::io(path, e))
}

/// Reads back a file written by [`emit_records`].
pub fn read_records(path: &Path, format: OutputFormat) -> Result<Vec<RecordLine>, BuildError> {
    let text = std::fs::read_to_string(path).map_err(|e| BuildError::io(path, e))?;
    let bad = |line: usize, message: String| BuildError::BadRecord {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || (format == OutputFormat::Tsv && i == 0) {
            continue;
        }
        match format {
            OutputFormat::Jsonl => {
                let r: AnyJson = serde_json::from_str(line).map_err(|e| bad(i + 1, e.to_string()))?;
                out.push(RecordLine {
                    id: r.id,
                    text: r.prompt,
                    target: r.target,
                    corpus: r.corpus,
                });
            }
            OutputFormat::Tsv => {
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 4 {
                    return Err(bad(i + 1, format!("expected 4 fields, found {}", f.len())));
                }
                out.push(RecordLine {
                    id: f[0].parse().map_err(|_| bad(i + 1, "bad id".into()))?,
                    text: unescape_tsv(f[1]),
                    target: unescape_tsv(f[2]),
                    corpus: unescape_tsv(f[3]),
                });
            }
        }
    }
    Ok(out)
}
