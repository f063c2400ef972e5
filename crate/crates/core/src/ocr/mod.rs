//! OCR-like noise for clean corpora.
//!
//! [`simulate_ocr`] is a character-level stochastic channel (confusions,
//! deletions, insertions, split and merged words, illegible lines).
//! [`external_ocr`] hands batches of plain text to an external
//! render-and-recognize command instead.

mod external;
mod table;

use rand::Rng as _;
use thiserror::Error;

use crate::conll::Corpus;
use crate::seed;

pub use external::{external_ocr, ExternalOcrOutput, ExternalPipelineConfig};
pub use table::SubstitutionTable;

#[derive(Debug, Error)]
pub enum OcrError {
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("confusion table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("{0} alphabet is empty or contains whitespace")]
    Alphabet(&'static str),
    #[error("batch size must be at least 1")]
    BatchSize,
    #[error("batch {batch}: failed to run channel command: {source}")]
    Spawn {
        batch: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("batch {batch}: channel command exited with {status}: {stderr}")]
    CommandFailed {
        batch: usize,
        status: String,
        stderr: String,
    },
    #[error("batch {batch}: channel command timed out after {seconds:.1}s")]
    Timeout { batch: usize, seconds: f64 },
    #[error("batch {batch}: channel output is not UTF-8")]
    Encoding { batch: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcrNoiseConfig {
    pub substitution_table: SubstitutionTable,
    pub p_substitute: f64,
    pub p_delete: f64,
    pub p_insert: f64,
    pub p_space_split: f64,
    pub p_space_merge: f64,
    pub p_illegible_line: f64,
    /// Characters of illegible lines.
    pub garble_alphabet: Vec<char>,
    /// Characters drawn for spurious insertions.
    pub insert_alphabet: Vec<char>,
    pub seed: u64,
}

impl Default for OcrNoiseConfig {
    fn default() -> Self {
        OcrNoiseConfig {
            substitution_table: SubstitutionTable::builtin(),
            p_substitute: 0.02,
            p_delete: 0.005,
            p_insert: 0.005,
            p_space_split: 0.01,
            p_space_merge: 0.01,
            p_illegible_line: 0.01,
            garble_alphabet: "-=~_^*#|+<>".chars().collect(),
            insert_alphabet: ".,'`-il1".chars().collect(),
            seed: 0,
        }
    }
}

impl OcrNoiseConfig {
    /// Every probability set to 0; the channel is then the identity.
    pub fn noiseless() -> Self {
        OcrNoiseConfig {
            p_substitute: 0.0,
            p_delete: 0.0,
            p_insert: 0.0,
            p_space_split: 0.0,
            p_space_merge: 0.0,
            p_illegible_line: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OcrError> {
        let probs = [
            ("p_substitute", self.p_substitute),
            ("p_delete", self.p_delete),
            ("p_insert", self.p_insert),
            ("p_space_split", self.p_space_split),
            ("p_space_merge", self.p_space_merge),
            ("p_illegible_line", self.p_illegible_line),
        ];
        for (name, value) in probs {
            if !(0.0..=1.0).contains(&value) {
                return Err(OcrError::Probability { name, value });
            }
        }
        let bad = |a: &[char]| a.is_empty() || a.iter().any(|c| c.is_whitespace());
        if bad(&self.garble_alphabet) {
            return Err(OcrError::Alphabet("garble"));
        }
        if bad(&self.insert_alphabet) {
            return Err(OcrError::Alphabet("insert"));
        }
        Ok(())
    }
}

/// Channel output with per-character provenance.
///
/// `provenance[k]` is the index (in characters) into `corpus.plain_text()` of
/// the clean character that produced output character `k`, or `None` for
/// spurious insertions. Characters of illegible lines are mapped position by
/// position onto the clean line they replace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcrOutput {
    pub text: String,
    pub provenance: Vec<Option<usize>>,
    /// Indices of sentences replaced by garble.
    pub illegible: Vec<usize>,
}

struct Emitter<'a> {
    text: &'a mut String,
    provenance: &'a mut Vec<Option<usize>>,
}

impl Emitter<'_> {
    fn push(&mut self, c: char, source: Option<usize>) {
        self.text.push(c);
        self.provenance.push(source);
    }
}

fn pick<'a>(rng: &mut seed::Rng, alphabet: &'a [char]) -> &'a char {
    &alphabet[rng.gen_range(0..alphabet.len())]
}

/// Runs the channel over one line (without its newline). `offset` is the
/// position of the line's first character in the full clean text.
fn noisify_line(line: &[char], offset: usize, config: &OcrNoiseConfig, rng: &mut seed::Rng, out: &mut Emitter<'_>) -> bool {
    if rng.gen::<f64>() < config.p_illegible_line {
        for k in 0..line.len() {
            let c = *pick(rng, &config.garble_alphabet);
            out.push(c, Some(offset + k));
        }
        return true;
    }

    let table = &config.substitution_table;
    let mut i = 0;
    while i < line.len() {
        let c = line[i];
        if c == ' ' {
            if rng.gen::<f64>() >= config.p_space_merge {
                out.push(' ', Some(offset + i));
            }
            i += 1;
            continue;
        }

        // Longest rule first; at most one rule fires per position.
        let mut consumed = 0;
        if i + 1 < line.len() && line[i + 1] != ' ' {
            let key: String = line[i..i + 2].iter().collect();
            if let Some(choices) = table.get(&key) {
                if rng.gen::<f64>() < config.p_substitute {
                    for (k, r) in table::choose(choices, rng).chars().enumerate() {
                        out.push(r, Some(offset + i + k.min(1)));
                    }
                    consumed = 2;
                }
            }
        }
        if consumed == 0 {
            let key = c.to_string();
            if let Some(choices) = table.get(&key) {
                if rng.gen::<f64>() < config.p_substitute {
                    for r in table::choose(choices, rng).chars() {
                        out.push(r, Some(offset + i));
                    }
                    consumed = 1;
                }
            }
        }
        if consumed == 0 {
            if rng.gen::<f64>() >= config.p_delete {
                out.push(c, Some(offset + i));
            }
            consumed = 1;
        }
        i += consumed;

        if rng.gen::<f64>() < config.p_insert {
            let c = *pick(rng, &config.insert_alphabet);
            out.push(c, None);
        }
        if i < line.len() && line[i] != ' ' && rng.gen::<f64>() < config.p_space_split {
            out.push(' ', None);
        }
    }
    false
}

/// Like [`simulate_ocr`], also returning where each output character came
/// from.
pub fn simulate_ocr_traced(corpus: &Corpus, config: &OcrNoiseConfig) -> Result<OcrOutput, OcrError> {
    config.validate()?;
    let mut text = String::new();
    let mut provenance = Vec::new();
    let mut illegible = Vec::new();
    let mut offset = 0;
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        let line: Vec<char> = sentence.text().chars().collect();
        let mut rng = seed::rng(config.seed, &[si as u64]);
        let mut out = Emitter {
            text: &mut text,
            provenance: &mut provenance,
        };
        if noisify_line(&line, offset, config, &mut rng, &mut out) {
            illegible.push(si);
        }
        out.push('\n', Some(offset + line.len()));
        offset += line.len() + 1;
    }
    Ok(OcrOutput {
        text,
        provenance,
        illegible,
    })
}

/// Noisy raw text for `corpus`: one line per sentence, tokens separated by
/// spaces, no labels.
pub fn simulate_ocr(corpus: &Corpus, config: &OcrNoiseConfig) -> Result<String, OcrError> {
    simulate_ocr_traced(corpus, config).map(|o| o.text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::{Label, Sentence, TagScheme, Token};

    fn corpus(lines: &[&str]) -> Corpus {
        let sentences = lines
            .iter()
            .map(|l| {
                Sentence::new(
                    l.split_whitespace()
                        .map(|w| Token::new(w, Label::Outside).unwrap())
                        .collect(),
                )
            })
            .collect();
        Corpus::new(sentences, TagScheme::Iob1)
    }

    #[test]
    fn noiseless_is_identity() {
        let c = corpus(&["Le maire de Paris", "Het huis in Leiden ."]);
        let out = simulate_ocr_traced(&c, &OcrNoiseConfig::noiseless()).unwrap();
        assert_eq!(out.text, c.plain_text());
        assert!(out.provenance.iter().enumerate().all(|(k, p)| *p == Some(k)));
    }

    #[test]
    fn fully_illegible() {
        let c = corpus(&["Le maire de Paris", "x"]);
        let cfg = OcrNoiseConfig {
            p_illegible_line: 1.0,
            ..OcrNoiseConfig::default()
        };
        let out = simulate_ocr_traced(&c, &cfg).unwrap();
        assert_eq!(out.illegible, vec![0, 1]);
        let lines: Vec<&str> = out.text.lines().collect();
        assert_eq!(lines.len(), 2);
        for (line, src) in lines.iter().zip(["Le maire de Paris", "x"]) {
            assert_eq!(line.chars().count(), src.chars().count());
            assert!(line.chars().all(|ch| cfg.garble_alphabet.contains(&ch)));
        }
    }

    #[test]
    fn substitution_example() {
        let c = corpus(&["tree"]);
        let cfg = OcrNoiseConfig {
            substitution_table: SubstitutionTable::parse("e\tc\t1\n").unwrap(),
            p_substitute: 1.0,
            ..OcrNoiseConfig::noiseless()
        };
        assert_eq!(simulate_ocr(&c, &cfg).unwrap(), "trcc\n");
    }

    #[test]
    fn longest_match_first() {
        let c = corpus(&["barn"]);
        let cfg = OcrNoiseConfig {
            substitution_table: SubstitutionTable::parse("rn\tm\t1\nr\tx\t1\nn\ty\t1\n").unwrap(),
            p_substitute: 1.0,
            ..OcrNoiseConfig::noiseless()
        };
        let out = simulate_ocr_traced(&c, &cfg).unwrap();
        assert_eq!(out.text, "bam\n");
        assert_eq!(out.provenance, vec![Some(0), Some(1), Some(2), Some(4)]);
    }

    #[test]
    fn space_merge_and_split() {
        let c = corpus(&["ab cd"]);
        let merge = OcrNoiseConfig {
            p_space_merge: 1.0,
            ..OcrNoiseConfig::noiseless()
        };
        assert_eq!(simulate_ocr(&c, &merge).unwrap(), "abcd\n");
        let split = OcrNoiseConfig {
            p_space_split: 1.0,
            ..OcrNoiseConfig::noiseless()
        };
        assert_eq!(simulate_ocr(&c, &split).unwrap(), "a b c d\n");
    }

    #[test]
    fn deletion_and_insertion() {
        let c = corpus(&["abc"]);
        let del = OcrNoiseConfig {
            p_delete: 1.0,
            ..OcrNoiseConfig::noiseless()
        };
        assert_eq!(simulate_ocr(&c, &del).unwrap(), "\n");
        let ins = OcrNoiseConfig {
            p_insert: 1.0,
            insert_alphabet: vec!['.'],
            ..OcrNoiseConfig::noiseless()
        };
        let out = simulate_ocr_traced(&c, &ins).unwrap();
        assert_eq!(out.text, "a.b.c.\n");
        assert_eq!(out.provenance[1], None);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = corpus(&["Le maire de Paris est venu hier soir ."; 20]);
        let cfg = OcrNoiseConfig {
            p_substitute: 0.3,
            seed: 11,
            ..OcrNoiseConfig::default()
        };
        assert_eq!(simulate_ocr(&c, &cfg).unwrap(), simulate_ocr(&c, &cfg).unwrap());
        let other = OcrNoiseConfig { seed: 12, ..cfg.clone() };
        assert_ne!(simulate_ocr(&c, &cfg).unwrap(), simulate_ocr(&c, &other).unwrap());
    }

    #[test]
    fn rejects_bad_probability() {
        let cfg = OcrNoiseConfig {
            p_delete: 1.5,
            ..OcrNoiseConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(OcrError::Probability { name: "p_delete", .. })
        ));
    }
}
