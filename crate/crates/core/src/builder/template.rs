use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::BuildError;

const DEFAULT_VERBOSE: &str = include_str!("../../config/verbose_prompt.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placeholder {
    Language,
    Framework,
    Corpus,
    Genre,
    Context,
    Arg1,
    Arg2,
    Direction,
    Features,
    LabelList,
}

impl Placeholder {
    pub const ALL: [Placeholder; 10] = [
        Placeholder::Language,
        Placeholder::Framework,
        Placeholder::Corpus,
        Placeholder::Genre,
        Placeholder::Context,
        Placeholder::Arg1,
        Placeholder::Arg2,
        Placeholder::Direction,
        Placeholder::Features,
        Placeholder::LabelList,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Placeholder::Language => "LANGUAGE",
            Placeholder::Framework => "FRAMEWORK",
            Placeholder::Corpus => "CORPUS",
            Placeholder::Genre => "GENRE",
            Placeholder::Context => "CONTEXT",
            Placeholder::Arg1 => "ARG1",
            Placeholder::Arg2 => "ARG2",
            Placeholder::Direction => "DIRECTION",
            Placeholder::Features => "FEATURES",
            Placeholder::LabelList => "LABEL_LIST",
        }
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.name())
    }
}

impl FromStr for Placeholder {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Placeholder::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(Placeholder),
}

/// Prompt body with `{NAME}` placeholders. Braces that do not enclose an
/// upper-case name are literal text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    name: String,
    segments: Vec<Segment>,
}

fn placeholder_at(body: &str) -> Option<&str> {
    let rest = body.strip_prefix('{')?;
    let end = rest.find('}')?;
    let name = &rest[..end];
    let valid = !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_');
    valid.then_some(name)
}

impl PromptTemplate {
    pub fn parse(name: &str, body: &str) -> Result<Self, BuildError> {
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut i = 0;
        while i < body.len() {
            let rest = &body[i..];
            if let Some(ph) = placeholder_at(rest) {
                let slot = ph
                    .parse::<Placeholder>()
                    .map_err(|_| BuildError::Template(format!("unknown placeholder {{{ph}}}")))?;
                if !text.is_empty() {
                    segments.push(Segment::Text(std::mem::take(&mut text)));
                }
                segments.push(Segment::Slot(slot));
                i += ph.len() + 2;
            } else {
                let ch = rest.chars().next().expect("non-empty remainder");
                text.push(ch);
                i += ch.len_utf8();
            }
        }
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        let template = PromptTemplate {
            name: name.to_string(),
            segments,
        };
        for required in [Placeholder::Arg1, Placeholder::Arg2, Placeholder::LabelList] {
            let n = template.count(required);
            if n != 1 {
                return Err(BuildError::Template(format!(
                    "{required} must occur exactly once, found {n}"
                )));
            }
        }
        Ok(template)
    }

    pub fn load(path: &Path) -> Result<Self, BuildError> {
        let body = std::fs::read_to_string(path).map_err(|e| BuildError::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "template".into());
        Self::parse(&name, &body)
    }

    /// The bundled verbose instructional template.
    pub fn default_verbose() -> Self {
        Self::parse("verbose", DEFAULT_VERBOSE).expect("bundled template is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn count(&self, placeholder: Placeholder) -> usize {
        self.segments
            .iter()
            .filter(|s| **s == Segment::Slot(placeholder))
            .count()
    }

    pub fn render(&self, mut value: impl FnMut(Placeholder) -> String) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(p) => out.push_str(&value(*p)),
            }
        }
        out
    }
}
