//! Single-edit synthetic corruption of word tokens.
//!
//! A fraction of word tokens receives exactly one character edit (insert,
//! remove or transpose). Word boundaries never move, so labels carry over
//! token by token.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use thiserror::Error;

use crate::conll::Corpus;
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum CorruptionError {
    #[error("corruption rate {0} outside [0, 1]")]
    Rate(f64),
    #[error("no corruption operations selected")]
    NoOperations,
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("alphabet line {line}: expected a single non-whitespace character, got {text:?}")]
    AlphabetEntry { line: usize, text: String },
    #[error("unknown alphabet {0:?} (expected fr or nl)")]
    UnknownLanguage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CorruptionOp {
    Insert,
    Remove,
    Transpose,
}

impl fmt::Display for CorruptionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorruptionOp::Insert => "insert",
            CorruptionOp::Remove => "remove",
            CorruptionOp::Transpose => "transpose",
        })
    }
}

impl FromStr for CorruptionOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "insert" => Ok(CorruptionOp::Insert),
            "remove" => Ok(CorruptionOp::Remove),
            "transpose" => Ok(CorruptionOp::Transpose),
            _ => Err(format!("unknown corruption operation {s:?}")),
        }
    }
}

/// Ordered, duplicate-free set of insertion characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet(Vec<char>);

const FRENCH: &str = include_str!("../data/alphabets/fr.txt");
const DUTCH: &str = include_str!("../data/alphabets/nl.txt");

impl Alphabet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self, CorruptionError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in chars {
            if c.is_whitespace() {
                return Err(CorruptionError::AlphabetEntry {
                    line: out.len() + 1,
                    text: c.to_string(),
                });
            }
            if seen.insert(c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(CorruptionError::EmptyAlphabet);
        }
        Ok(Alphabet(out))
    }

    /// Reads the one-character-per-line file format. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, CorruptionError> {
        let mut chars = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let entry = line.trim_end_matches('\r');
            if entry.is_empty() {
                continue;
            }
            let mut it = entry.chars();
            match (it.next(), it.next()) {
                (Some(c), None) if !c.is_whitespace() => chars.push(c),
                _ => {
                    return Err(CorruptionError::AlphabetEntry {
                        line: i + 1,
                        text: entry.to_string(),
                    })
                }
            }
        }
        Self::new(chars)
    }

    /// Built-in alphabet for `fr` or `nl`.
    pub fn for_language(language: &str) -> Result<Self, CorruptionError> {
        match language {
            "fr" => Self::parse(FRENCH),
            "nl" => Self::parse(DUTCH),
            other => Err(CorruptionError::UnknownLanguage(other.to_string())),
        }
    }

    pub fn chars(&self) -> &[char] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionConfig {
    pub rate: f64,
    pub operations: BTreeSet<CorruptionOp>,
    pub alphabet: Alphabet,
    pub seed: u64,
}

impl CorruptionConfig {
    /// Rate 0.2 with all three operations.
    pub fn new(alphabet: Alphabet, seed: u64) -> Self {
        CorruptionConfig {
            rate: 0.2,
            operations: [CorruptionOp::Insert, CorruptionOp::Remove, CorruptionOp::Transpose]
                .into_iter()
                .collect(),
            alphabet,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), CorruptionError> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(CorruptionError::Rate(self.rate));
        }
        if self.operations.is_empty() {
            return Err(CorruptionError::NoOperations);
        }
        Ok(())
    }
}

/// Tokens eligible for corruption contain at least one alphabetic character.
pub fn is_eligible(surface: &str) -> bool {
    surface.chars().any(char::is_alphabetic)
}

fn applicable(op: CorruptionOp, chars: &[char]) -> bool {
    match op {
        CorruptionOp::Insert => true,
        CorruptionOp::Remove => chars.len() >= 2,
        // Swapping two equal characters would be a no-op.
        CorruptionOp::Transpose => chars.windows(2).any(|w| w[0] != w[1]),
    }
}

/// Applies `op` to `chars` in place.
fn apply(op: CorruptionOp, chars: &mut Vec<char>, alphabet: &Alphabet, rng: &mut seed::Rng) {
    match op {
        CorruptionOp::Insert => {
            let pos = rng.gen_range(0..=chars.len());
            let c = *alphabet.chars().choose(rng).expect("non-empty alphabet");
            chars.insert(pos, c);
        }
        CorruptionOp::Remove => {
            let pos = rng.gen_range(0..chars.len());
            chars.remove(pos);
        }
        CorruptionOp::Transpose => {
            let pairs: Vec<usize> = (0..chars.len() - 1)
                .filter(|&i| chars[i] != chars[i + 1])
                .collect();
            let i = *pairs.choose(rng).expect("transpose applicable");
            chars.swap(i, i + 1);
        }
    }
}

/// Corrupts a single token surface with the generator for its position.
/// Returns `None` when the token is not selected.
pub fn corrupt_token(
    surface: &str,
    config: &CorruptionConfig,
    sentence_index: usize,
    token_index: usize,
) -> Option<String> {
    if !is_eligible(surface) {
        return None;
    }
    let mut rng = seed::rng(config.seed, &[sentence_index as u64, token_index as u64]);
    if rng.gen::<f64>() >= config.rate {
        return None;
    }
    let mut chars: Vec<char> = surface.chars().collect();
    let ops: Vec<CorruptionOp> = config
        .operations
        .iter()
        .copied()
        .filter(|&op| applicable(op, &chars))
        .collect();
    let op = *ops.choose(&mut rng)?;
    apply(op, &mut chars, &config.alphabet, &mut rng);
    Some(chars.into_iter().collect())
}

/// Corrupts `corpus` token by token. Labels, token counts and sentence
/// boundaries are unchanged; modified tokens get their `ocr_error` flag set.
pub fn corrupt_corpus(corpus: &Corpus, config: &CorruptionConfig) -> Result<Corpus, CorruptionError> {
    config.validate()?;
    let mut out = corpus.clone();
    for (si, sentence) in out.sentences.iter_mut().enumerate() {
        for (ti, token) in sentence.tokens.iter_mut().enumerate() {
            if let Some(noisy) = corrupt_token(token.surface(), config, si, ti) {
                token
                    .set_surface(noisy)
                    .expect("single edits keep tokens non-empty and whitespace-free");
                token.ocr_error = true;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::{EntityType, Label, Sentence, TagScheme, Token};

    fn config(rate: f64, ops: &[CorruptionOp], seed: u64) -> CorruptionConfig {
        CorruptionConfig {
            rate,
            operations: ops.iter().copied().collect(),
            alphabet: Alphabet::for_language("fr").unwrap(),
            seed,
        }
    }

    fn corpus(words: &[&str]) -> Corpus {
        let tokens = words
            .iter()
            .map(|w| Token::new(*w, Label::Inside(EntityType::Loc)).unwrap())
            .collect();
        Corpus::new(vec![Sentence::new(tokens)], TagScheme::Iob1)
    }

    #[test]
    fn rate_zero_is_identity() {
        let c = corpus(&["Paris", "est", "belle", "."]);
        let all = [CorruptionOp::Insert, CorruptionOp::Remove, CorruptionOp::Transpose];
        assert_eq!(corrupt_corpus(&c, &config(0.0, &all, 3)).unwrap(), c);
    }

    #[test]
    fn transpose_abc_is_uniform_over_adjacent_swaps() {
        let mut seen = std::collections::BTreeMap::new();
        for seed in 0..2000 {
            let cfg = config(1.0, &[CorruptionOp::Transpose], seed);
            let out = corrupt_token("abc", &cfg, 0, 0).unwrap();
            *seen.entry(out).or_insert(0usize) += 1;
        }
        let keys: Vec<_> = seen.keys().cloned().collect();
        assert_eq!(keys, vec!["acb".to_string(), "bac".to_string()]);
        // Binomial(2000, 0.5): 5 sigma is about 112.
        assert!(seen.values().all(|&n| (888..=1112).contains(&n)), "{seen:?}");
    }

    #[test]
    fn labels_preserved_and_flags_set() {
        let c = corpus(&["abc"]);
        let out = corrupt_corpus(&c, &config(1.0, &[CorruptionOp::Transpose], 1)).unwrap();
        let t = &out.sentences[0].tokens[0];
        assert_eq!(t.label, Label::Inside(EntityType::Loc));
        assert!(t.ocr_error);
        assert_ne!(t.surface(), "abc");
    }

    #[test]
    fn punctuation_untouched() {
        let c = corpus(&[".", ",", "1887", "--"]);
        let all = [CorruptionOp::Insert, CorruptionOp::Remove, CorruptionOp::Transpose];
        assert_eq!(corrupt_corpus(&c, &config(1.0, &all, 9)).unwrap(), c);
    }

    #[test]
    fn single_char_tokens_only_take_insertions() {
        let cfg = config(1.0, &[CorruptionOp::Remove, CorruptionOp::Transpose], 4);
        assert_eq!(corrupt_token("a", &cfg, 0, 0), None);
        let cfg = config(1.0, &[CorruptionOp::Remove, CorruptionOp::Insert], 4);
        for seed in 0..50 {
            let cfg = CorruptionConfig { seed, ..cfg.clone() };
            assert_eq!(corrupt_token("a", &cfg, 0, 0).unwrap().chars().count(), 2);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = config(1.5, &[CorruptionOp::Insert], 0);
        assert_eq!(cfg.validate(), Err(CorruptionError::Rate(1.5)));
        cfg.rate = 0.1;
        cfg.operations.clear();
        assert_eq!(cfg.validate(), Err(CorruptionError::NoOperations));
    }

    #[test]
    fn alphabet_files() {
        let fr = Alphabet::for_language("fr").unwrap();
        assert!(fr.chars().contains(&'œ') && fr.chars().contains(&'Z'));
        let nl = Alphabet::for_language("nl").unwrap();
        assert!(nl.chars().contains(&'ö') && !nl.chars().contains(&'œ'));
        assert!(Alphabet::parse("").is_err());
        assert!(matches!(
            Alphabet::parse("a\nbc\n"),
            Err(CorruptionError::AlphabetEntry { line: 2, .. })
        ));
        assert!(Alphabet::for_language("de").is_err());
    }
}
