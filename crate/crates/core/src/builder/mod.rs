//! Model inputs: verbose and structured decoder prompts, encoder token
//! sequences, and their JSON-lines / TSV serialization.

mod emit;
mod template;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusId, Direction, LabelInventory, RelationInstance};
use crate::features::{mark_direction, ContextWindow, FeatureVector, SameSpeaker};

pub use emit::{emit_records, read_records, render_records, ModelRecord, OutputFormat, RecordLine};
pub use template::{Placeholder, PromptTemplate};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("template error: {0}")]
    Template(String),
    #[error("instance {instance_id}: label '{label}' is not in the inventory")]
    UnknownLabel { instance_id: usize, label: String },
    #[error("instance {0}: empty argument text")]
    EmptyArgument(usize),
    #[error("unknown feature name '{0}'")]
    UnknownFeature(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    BadRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl BuildError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        BuildError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildWarning {
    /// The encoder vocabulary is binary, so an unknown speaker relation is
    /// written as `SAME_SPEAKER_0`.
    UnknownSpeakerAsZero { instance_id: usize },
}

impl fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildWarning::UnknownSpeakerAsZero { instance_id } => write!(
                f,
                "instance {instance_id}: speaker information unavailable, encoded as SAME_SPEAKER_0"
            ),
        }
    }
}

/// One of the ten hand-crafted instance features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Genre,
    Children,
    Discontinuous,
    IsSentence,
    LengthRatio,
    SameSpeaker,
    DocLength,
    Position,
    Distance,
    LexicalOverlap,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 10] = [
        FeatureKind::Genre,
        FeatureKind::Children,
        FeatureKind::Discontinuous,
        FeatureKind::IsSentence,
        FeatureKind::LengthRatio,
        FeatureKind::SameSpeaker,
        FeatureKind::DocLength,
        FeatureKind::Position,
        FeatureKind::Distance,
        FeatureKind::LexicalOverlap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Genre => "genre",
            FeatureKind::Children => "children",
            FeatureKind::Discontinuous => "discontinuous",
            FeatureKind::IsSentence => "is_sentence",
            FeatureKind::LengthRatio => "length_ratio",
            FeatureKind::SameSpeaker => "same_speaker",
            FeatureKind::DocLength => "doc_length",
            FeatureKind::Position => "position",
            FeatureKind::Distance => "distance",
            FeatureKind::LexicalOverlap => "lexical_overlap",
        }
    }
}

impl FromStr for FeatureKind {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, BuildError> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| BuildError::UnknownFeature(s.to_string()))
    }
}

/// Features rendered into a model input, kept in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSubset(Vec<FeatureKind>);

impl FeatureSubset {
    pub fn new(kinds: impl IntoIterator<Item = FeatureKind>) -> Self {
        let mut v: Vec<FeatureKind> = kinds.into_iter().collect();
        v.sort();
        v.dedup();
        FeatureSubset(v)
    }

    pub fn empty() -> Self {
        FeatureSubset(Vec::new())
    }

    /// Same speaker, position, distance.
    pub fn decoder_default() -> Self {
        Self::new([FeatureKind::SameSpeaker, FeatureKind::Position, FeatureKind::Distance])
    }

    /// Genre, discontinuity, sentencehood, same speaker.
    pub fn encoder_default() -> Self {
        Self::new([
            FeatureKind::Genre,
            FeatureKind::Discontinuous,
            FeatureKind::IsSentence,
            FeatureKind::SameSpeaker,
        ])
    }

    pub fn parse_list<S: AsRef<str>>(names: &[S]) -> Result<Self, BuildError> {
        let kinds = names
            .iter()
            .map(|n| n.as_ref().parse())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(kinds))
    }

    pub fn contains(&self, kind: FeatureKind) -> bool {
        self.0.contains(&kind)
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub decoder_features: FeatureSubset,
    pub encoder_features: FeatureSubset,
    /// Include the context window in decoder prompts.
    pub context: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            decoder_features: FeatureSubset::decoder_default(),
            encoder_features: FeatureSubset::encoder_default(),
            context: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    Verbose,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptRecord {
    pub instance_id: usize,
    pub corpus: CorpusId,
    pub prompt: String,
    pub target: String,
    pub style: PromptStyle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderRecord {
    pub instance_id: usize,
    pub corpus: CorpusId,
    pub input: String,
    pub target: String,
}

fn checked_target(inst: &RelationInstance, inv: &LabelInventory) -> Result<String, BuildError> {
    inv.canonical(&inst.label)
        .map(str::to_string)
        .ok_or_else(|| BuildError::UnknownLabel {
            instance_id: inst.instance_id,
            label: inst.label.clone(),
        })
}

fn check_args(inst: &RelationInstance) -> Result<(), BuildError> {
    if inst.unit1_text.trim().is_empty() || inst.unit2_text.trim().is_empty() {
        return Err(BuildError::EmptyArgument(inst.instance_id));
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

/// One `(name, value)` pair per selected feature, `None` when the feature has
/// no value to show (unknown speaker, missing unit inventory).
fn feature_values(fv: &FeatureVector, subset: &FeatureSubset) -> Vec<(FeatureKind, Option<String>)> {
    subset
        .kinds()
        .iter()
        .map(|&k| {
            let v = match k {
                FeatureKind::Genre => Some(fv.genre.clone()),
                FeatureKind::Children => match (fv.children_u1, fv.children_u2) {
                    (Some(a), Some(b)) => Some(format!("{a}/{b}")),
                    _ => None,
                },
                FeatureKind::Discontinuous => Some(format!(
                    "Arg1 {}, Arg2 {}",
                    yes_no(fv.discontinuous_u1),
                    yes_no(fv.discontinuous_u2)
                )),
                FeatureKind::IsSentence => Some(format!(
                    "Arg1 {}, Arg2 {}",
                    yes_no(fv.is_sentence_u1),
                    yes_no(fv.is_sentence_u2)
                )),
                FeatureKind::LengthRatio => Some(format!("{:.2}", fv.length_ratio)),
                FeatureKind::SameSpeaker => match fv.same_speaker {
                    SameSpeaker::True => Some("yes".into()),
                    SameSpeaker::False => Some("no".into()),
                    SameSpeaker::Unknown => None,
                },
                FeatureKind::DocLength => Some(fv.doc_length.to_string()),
                FeatureKind::Position => Some(format!("{:.2}", fv.position)),
                FeatureKind::Distance => Some(fv.distance.to_string()),
                FeatureKind::LexicalOverlap => Some(fv.lexical_overlap.to_string()),
            };
            (k, v)
        })
        .collect()
}

fn verbose_feature_label(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Genre => "Genre",
        FeatureKind::Children => "Child units (Arg1/Arg2)",
        FeatureKind::Discontinuous => "Discontinuous unit",
        FeatureKind::IsSentence => "Complete sentence",
        FeatureKind::LengthRatio => "Length ratio (Arg1/Arg2)",
        FeatureKind::SameSpeaker => "Same speaker",
        FeatureKind::DocLength => "Document length in tokens",
        FeatureKind::Position => "Position in document",
        FeatureKind::Distance => "Units between Arg1 and Arg2",
        FeatureKind::LexicalOverlap => "Shared words",
    }
}

fn render_verbose_features(fv: &FeatureVector, subset: &FeatureSubset) -> String {
    let lines: Vec<String> = feature_values(fv, subset)
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| format!("- {}: {v}", verbose_feature_label(k))))
        .collect();
    if lines.is_empty() {
        "none".into()
    } else {
        lines.join("\n")
    }
}

fn render_context(ctx: &ContextWindow, labels: [&str; 3]) -> Vec<String> {
    [(&ctx.pre, labels[0]), (&ctx.focal, labels[1]), (&ctx.post, labels[2])]
        .into_iter()
        .filter(|(t, _)| !t.trim().is_empty())
        .map(|(t, l)| format!("{l}: {t}"))
        .collect()
}

fn render_label_list(inv: &LabelInventory) -> String {
    inv.labels()
        .iter()
        .enumerate()
        .map(|(i, l)| match inv.gloss(i) {
            Some(g) => format!("{l} ({g})"),
            None => l.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders the verbose instructional prompt from `tpl`.
pub fn build_verbose_prompt(
    inst: &RelationInstance,
    fv: &FeatureVector,
    ctx: &ContextWindow,
    tpl: &PromptTemplate,
    inv: &LabelInventory,
    opts: &BuildOptions,
) -> Result<PromptRecord, BuildError> {
    let target = checked_target(inst, inv)?;
    check_args(inst)?;
    let prompt = tpl.render(|p| match p {
        Placeholder::Language => fv.lcf.language().to_string(),
        Placeholder::Framework => fv.lcf.framework().to_string(),
        Placeholder::Corpus => fv.lcf.corpus().to_string(),
        Placeholder::Genre => fv.genre.clone(),
        Placeholder::Context => {
            let lines = if opts.context {
                render_context(ctx, ["Preceding", "Focal", "Following"])
            } else {
                Vec::new()
            };
            if lines.is_empty() {
                "none".into()
            } else {
                lines.join("\n")
            }
        }
        Placeholder::Arg1 => inst.unit1_text.clone(),
        Placeholder::Arg2 => inst.unit2_text.clone(),
        Placeholder::Direction => inst.direction.to_string(),
        Placeholder::Features => render_verbose_features(fv, &opts.decoder_features),
        Placeholder::LabelList => render_label_list(inv),
    });
    Ok(PromptRecord {
        instance_id: inst.instance_id,
        corpus: fv.lcf.clone(),
        prompt,
        target,
        style: PromptStyle::Verbose,
    })
}

fn direction_symbol(direction: Direction) -> &'static str {
    match direction {
        Direction::Forward => ">",
        Direction::Backward => "<",
    }
}

/// Renders the compact delimiter-separated prompt, ending in
/// `$$ arg1 $$ > ## arg2 ##` (or `<` for `1<2`).
pub fn build_structured_prompt(
    inst: &RelationInstance,
    fv: &FeatureVector,
    ctx: &ContextWindow,
    inv: &LabelInventory,
    opts: &BuildOptions,
) -> Result<PromptRecord, BuildError> {
    let target = checked_target(inst, inv)?;
    check_args(inst)?;
    let mut lines = vec![format!(
        "lang={} fw={} corpus={}",
        fv.lcf.language(),
        fv.lcf.framework(),
        fv.lcf.corpus()
    )];
    let feats: Vec<String> = feature_values(fv, &opts.decoder_features)
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| format!("{}={}", k.name(), v.replace(' ', "_"))))
        .collect();
    if !feats.is_empty() {
        lines.push(feats.join(" "));
    }
    if opts.context {
        lines.extend(render_context(ctx, ["pre", "focal", "post"]));
    }
    lines.push(format!("labels: {}", inv.labels().join(", ")));
    lines.push(format!(
        "$$ {} $$ {} ## {} ##",
        inst.unit1_text,
        direction_symbol(inst.direction),
        inst.unit2_text
    ));
    Ok(PromptRecord {
        instance_id: inst.instance_id,
        corpus: fv.lcf.clone(),
        prompt: lines.join("\n"),
        target,
        style: PromptStyle::Structured,
    })
}

fn encoder_token(kind: FeatureKind, fv: &FeatureVector) -> String {
    match kind {
        FeatureKind::Genre => format!("GENRE_{}", fv.genre.split_whitespace().collect::<Vec<_>>().join("_")),
        FeatureKind::Children => format!(
            "CHILDREN_{}_{}",
            fv.children_u1.unwrap_or(0),
            fv.children_u2.unwrap_or(0)
        ),
        FeatureKind::Discontinuous => {
            format!("DISCONTINUOUS_{}", bit(fv.discontinuous_u1 || fv.discontinuous_u2))
        }
        FeatureKind::IsSentence => format!("IS_SENTENCE_{}", bit(fv.is_sentence_u1)),
        FeatureKind::LengthRatio => format!("LENGTH_RATIO_{:.2}", fv.length_ratio),
        FeatureKind::SameSpeaker => {
            format!("SAME_SPEAKER_{}", bit(fv.same_speaker == SameSpeaker::True))
        }
        FeatureKind::DocLength => format!("DOC_LENGTH_{}", fv.doc_length),
        FeatureKind::Position => format!("POSITION_{:.2}", fv.position),
        FeatureKind::Distance => format!("DISTANCE_{}", fv.distance),
        FeatureKind::LexicalOverlap => format!("LEXICAL_OVERLAP_{}", fv.lexical_overlap),
    }
}

/// Order of the categorical tokens in encoder input.
const ENCODER_ORDER: [FeatureKind; 10] = [
    FeatureKind::IsSentence,
    FeatureKind::Discontinuous,
    FeatureKind::SameSpeaker,
    FeatureKind::Genre,
    FeatureKind::Children,
    FeatureKind::LengthRatio,
    FeatureKind::DocLength,
    FeatureKind::Position,
    FeatureKind::Distance,
    FeatureKind::LexicalOverlap,
];

/// Renders the encoder token sequence:
/// `LANG_l FW_f CORP_c [SEP] <feature tokens> [SEP] } arg1 > Arg2: arg2`.
pub fn build_encoder_input(
    inst: &RelationInstance,
    fv: &FeatureVector,
    subset: &FeatureSubset,
) -> Result<(EncoderRecord, Option<BuildWarning>), BuildError> {
    check_args(inst)?;
    let mut tokens = vec![
        format!("LANG_{}", fv.lcf.language()),
        format!("FW_{}", fv.lcf.framework()),
        format!("CORP_{}", fv.lcf.corpus()),
        "[SEP]".to_string(),
    ];
    tokens.extend(
        ENCODER_ORDER
            .iter()
            .filter(|k| subset.contains(**k))
            .map(|&k| encoder_token(k, fv)),
    );
    tokens.push("[SEP]".into());
    let marked = mark_direction(&inst.unit1_text, inst.direction)
        .map_err(|_| BuildError::EmptyArgument(inst.instance_id))?;
    let input = format!("{} {} Arg2: {}", tokens.join(" "), marked, inst.unit2_text);
    let warning = (subset.contains(FeatureKind::SameSpeaker)
        && fv.same_speaker == SameSpeaker::Unknown)
        .then_some(BuildWarning::UnknownSpeakerAsZero {
            instance_id: inst.instance_id,
        });
    Ok((
        EncoderRecord {
            instance_id: inst.instance_id,
            corpus: fv.lcf.clone(),
            input,
            target: inst.label.clone(),
        },
        warning,
    ))
}
