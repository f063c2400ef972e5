//! CoNLL-format NER corpora: data model, parsing, writing and corpus-level
//! transformations.

mod io;
mod scheme;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{parse_conll, write_conll, ColumnSpec, ConllReader, RepairStats, Separator};
pub use scheme::{Chunk, TagScheme};
pub use transform::{
    convert_scheme, corpus_stats, downsample, map_tagset, split_corpus, CorpusStats, TagMapping,
};

#[derive(Debug, Error, PartialEq)]
pub enum ConllError {
    #[error("line {line}: expected at least {expected} columns, found {found}")]
    TooFewColumns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: invalid ocr flag {value:?}")]
    InvalidFlag { line: usize, value: String },
    #[error("sentence starting at line {line}: label sequence is not valid {scheme}")]
    InvalidSequence { line: usize, scheme: TagScheme },
    #[error("no tag scheme validates the corpus (first offending sentence starts at line {line})")]
    NoSchemeValidates { line: usize },
    #[error("invalid split ratios {0:?}: must be positive and sum to 1")]
    InvalidRatios((f64, f64, f64)),
    #[error("invalid token surface {0:?}")]
    InvalidSurface(String),
}

/// Entity categories. The Europeana tag set uses PER, ORG and LOC; MISC
/// appears in source corpora such as CoNLL-02 and WikiNER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "MISC")]
    Misc,
}

impl EntityType {
    pub const ALL: [EntityType; 4] = [
        EntityType::Per,
        EntityType::Org,
        EntityType::Loc,
        EntityType::Misc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Per => "PER",
            EntityType::Org => "ORG",
            EntityType::Loc => "LOC",
            EntityType::Misc => "MISC",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PER" => Ok(EntityType::Per),
            "ORG" => Ok(EntityType::Org),
            "LOC" => Ok(EntityType::Loc),
            "MISC" => Ok(EntityType::Misc),
            _ => Err(format!("unknown entity type {s:?}")),
        }
    }
}

/// A token label. Serialized as `O`, `I-<TYPE>` or `B-<TYPE>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Outside,
    Inside(EntityType),
    Begin(EntityType),
}

impl Label {
    pub fn entity_type(self) -> Option<EntityType> {
        match self {
            Label::Outside => None,
            Label::Inside(t) | Label::Begin(t) => Some(t),
        }
    }

    pub fn is_outside(self) -> bool {
        self == Label::Outside
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Outside => f.write_str("O"),
            Label::Inside(t) => write!(f, "I-{t}"),
            Label::Begin(t) => write!(f, "B-{t}"),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(Label::Outside);
        }
        match s.split_once('-') {
            Some(("I", t)) => t.parse().map(Label::Inside),
            Some(("B", t)) => t.parse().map(Label::Begin),
            _ => Err(format!("unknown label {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    surface: String,
    pub label: Label,
    /// Set when the surface differs from the clean source text.
    pub ocr_error: bool,
}

impl Token {
    /// Creates a token; the surface must be non-empty and whitespace-free.
    pub fn new(surface: impl Into<String>, label: Label) -> Result<Self, ConllError> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(ConllError::InvalidSurface(surface));
        }
        Ok(Token {
            surface,
            label,
            ocr_error: false,
        })
    }

    pub fn with_ocr_error(mut self, flag: bool) -> Self {
        self.ocr_error = flag;
        self
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    /// Replaces the surface, keeping label and flag. Same validity rules as
    /// [`Token::new`].
    pub fn set_surface(&mut self, surface: impl Into<String>) -> Result<(), ConllError> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(ConllError::InvalidSurface(surface));
        }
        self.surface = surface;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.tokens.iter().map(|t| t.label).collect()
    }

    /// Tokens joined by single spaces.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(t.surface());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub scheme: TagScheme,
    pub language: String,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>, scheme: TagScheme) -> Self {
        Corpus {
            sentences,
            scheme,
            language: String::from("und"),
        }
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Index of the first sentence whose labels are invalid under the
    /// corpus scheme, if any.
    pub fn first_invalid(&self) -> Option<usize> {
        self.sentences
            .iter()
            .position(|s| !self.scheme.is_valid(&s.labels()))
    }

    pub fn is_valid(&self) -> bool {
        self.first_invalid().is_none()
    }

    /// Plain text rendering: one line per sentence, tokens separated by a
    /// single space, every line terminated by `\n`.
    pub fn plain_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&s.text());
            out.push('\n');
        }
        out
    }
}
