use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EntityType, Label};

/// Chunk labeling scheme.
///
/// - `Io`: no `B-` labels; an entity is a maximal run of `I-X`.
/// - `Iob1`: `B-X` only separates two adjacent entities of type `X`.
/// - `Iob2`: every entity starts with `B-X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagScheme {
    #[serde(rename = "IO")]
    Io,
    #[serde(rename = "IOB1")]
    Iob1,
    #[serde(rename = "IOB2")]
    Iob2,
}

/// A typed token range `[start, end]` (inclusive) within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chunk {
    pub start: usize,
    pub end: usize,
    pub entity_type: EntityType,
}

impl TagScheme {
    /// Order in which schemes are tried when none is given.
    pub const DETECTION_ORDER: [TagScheme; 3] = [TagScheme::Iob1, TagScheme::Iob2, TagScheme::Io];

    pub fn is_valid(self, labels: &[Label]) -> bool {
        let prev_type = |i: usize| {
            if i == 0 {
                None
            } else {
                labels[i - 1].entity_type()
            }
        };
        labels.iter().enumerate().all(|(i, &l)| match (self, l) {
            (_, Label::Outside) => true,
            (TagScheme::Io, Label::Begin(_)) => false,
            (TagScheme::Io, Label::Inside(_)) => true,
            (TagScheme::Iob1, Label::Inside(_)) => true,
            (TagScheme::Iob1, Label::Begin(t)) => prev_type(i) == Some(t),
            (TagScheme::Iob2, Label::Begin(_)) => true,
            (TagScheme::Iob2, Label::Inside(t)) => prev_type(i) == Some(t),
        })
    }

    /// Chunks encoded by `labels`.
    ///
    /// Decoding is total: for the IOB schemes a `B-X` always opens a chunk and
    /// an `I-X` opens one whenever the previous token is not of type `X`; under
    /// IO, `B-X` is read as `I-X`. On valid input this is exactly the scheme's
    /// semantics.
    pub fn decode(self, labels: &[Label]) -> Vec<Chunk> {
        let mut chunks: Vec<Chunk> = Vec::new();
        let mut prev: Option<EntityType> = None;
        for (i, &l) in labels.iter().enumerate() {
            let opens = match l {
                Label::Outside => {
                    prev = None;
                    continue;
                }
                Label::Begin(t) => self != TagScheme::Io || prev != Some(t),
                Label::Inside(t) => prev != Some(t),
            };
            let t = l.entity_type().expect("non-outside label");
            if opens {
                chunks.push(Chunk {
                    start: i,
                    end: i,
                    entity_type: t,
                });
            } else if let Some(last) = chunks.last_mut() {
                last.end = i;
            }
            prev = Some(t);
        }
        chunks
    }

    /// Labels for a sentence of `len` tokens containing `chunks` (sorted,
    /// non-overlapping).
    pub fn encode(self, len: usize, chunks: &[Chunk]) -> Vec<Label> {
        let mut labels = vec![Label::Outside; len];
        let mut prev: Option<&Chunk> = None;
        for c in chunks {
            for l in &mut labels[c.start..=c.end] {
                *l = Label::Inside(c.entity_type);
            }
            let begin = match self {
                TagScheme::Io => false,
                TagScheme::Iob2 => true,
                TagScheme::Iob1 => {
                    prev.is_some_and(|p| p.end + 1 == c.start && p.entity_type == c.entity_type)
                }
            };
            if begin {
                labels[c.start] = Label::Begin(c.entity_type);
            }
            prev = Some(c);
        }
        labels
    }

    /// Coerces `labels` to the nearest valid sequence under this scheme and
    /// returns how many labels changed.
    pub fn repair(self, labels: &mut [Label]) -> usize {
        let fixed = self.encode(labels.len(), &self.decode(labels));
        let changed = labels.iter().zip(&fixed).filter(|(a, b)| a != b).count();
        labels.copy_from_slice(&fixed);
        changed
    }
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TagScheme::Io => "IO",
            TagScheme::Iob1 => "IOB1",
            TagScheme::Iob2 => "IOB2",
        })
    }
}

impl FromStr for TagScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "IO" => Ok(TagScheme::Io),
            "IOB1" | "IOB" => Ok(TagScheme::Iob1),
            "IOB2" | "BIO" => Ok(TagScheme::Iob2),
            _ => Err(format!("unknown tag scheme {s:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(s: &str) -> Vec<Label> {
        s.split_whitespace().map(|l| l.parse().unwrap()).collect()
    }

    #[test]
    fn validity() {
        assert!(TagScheme::Iob1.is_valid(&labels("I-LOC B-LOC")));
        assert!(!TagScheme::Iob1.is_valid(&labels("B-LOC I-LOC")));
        assert!(!TagScheme::Iob1.is_valid(&labels("I-PER B-LOC")));
        assert!(TagScheme::Iob2.is_valid(&labels("B-LOC I-LOC B-LOC")));
        assert!(!TagScheme::Iob2.is_valid(&labels("O I-LOC")));
        assert!(!TagScheme::Iob2.is_valid(&labels("B-PER I-LOC")));
        assert!(TagScheme::Io.is_valid(&labels("I-LOC I-LOC O I-PER")));
        assert!(!TagScheme::Io.is_valid(&labels("I-LOC B-LOC")));
        for s in TagScheme::DETECTION_ORDER {
            assert!(s.is_valid(&[]));
            assert!(s.is_valid(&labels("O O")));
        }
    }

    #[test]
    fn decode_iob1() {
        let c = TagScheme::Iob1.decode(&labels("O I-ORG I-PER I-PER B-PER"));
        assert_eq!(
            c,
            vec![
                Chunk { start: 1, end: 1, entity_type: EntityType::Org },
                Chunk { start: 2, end: 3, entity_type: EntityType::Per },
                Chunk { start: 4, end: 4, entity_type: EntityType::Per },
            ]
        );
    }

    #[test]
    fn decode_io_merges_runs() {
        let c = TagScheme::Io.decode(&labels("I-LOC I-LOC"));
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].start, c[0].end), (0, 1));
    }

    #[test]
    fn encode_each_scheme() {
        let chunks = TagScheme::Iob1.decode(&labels("I-LOC B-LOC O I-PER I-PER"));
        let show = |v: Vec<Label>| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        assert_eq!(show(TagScheme::Iob1.encode(5, &chunks)), "I-LOC B-LOC O I-PER I-PER");
        assert_eq!(show(TagScheme::Iob2.encode(5, &chunks)), "B-LOC B-LOC O B-PER I-PER");
        assert_eq!(show(TagScheme::Io.encode(5, &chunks)), "I-LOC I-LOC O I-PER I-PER");
    }

    #[test]
    fn repair_counts_changes() {
        let mut l = labels("B-PER I-PER O B-LOC");
        assert_eq!(TagScheme::Iob1.repair(&mut l), 2);
        assert_eq!(l, labels("I-PER I-PER O I-LOC"));
        let mut l = labels("O I-LOC I-LOC");
        assert_eq!(TagScheme::Iob2.repair(&mut l), 1);
        assert_eq!(l, labels("O B-LOC I-LOC"));
    }
}
