//! Exact-match chunk evaluation in the style of `conlleval`.

mod report;
mod significance;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::alignment::EntityFlags;
use crate::conll::{Chunk, Corpus, EntityType, Sentence, TagScheme};

pub use significance::{significance_test, SigTestResult};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{corpus} sentence {sentence}: labels are not valid {scheme}")]
    InvalidLabels {
        corpus: &'static str,
        sentence: usize,
        scheme: TagScheme,
    },
    #[error("corpora diverge at sentence {sentence}: {reason}")]
    StructureMismatch { sentence: usize, reason: String },
    #[error("gold entity {0:?} has no OCR-error flag")]
    MissingFlag(EntitySpan),
}

/// A typed entity: tokens `token_start..=token_end` of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EntitySpan {
    pub sentence_index: usize,
    pub token_start: usize,
    pub token_end: usize,
    pub entity_type: EntityType,
}

impl EntitySpan {
    pub fn from_chunk(sentence_index: usize, c: Chunk) -> Self {
        EntitySpan {
            sentence_index,
            token_start: c.start,
            token_end: c.end,
            entity_type: c.entity_type,
        }
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.sentence_index == other.sentence_index
            && self.token_start <= other.token_end
            && other.token_start <= self.token_end
    }
}

/// Entities of one sentence under `scheme`. Errors if the labels are not
/// valid under the scheme.
pub fn extract_entities(
    sentence: &Sentence,
    sentence_index: usize,
    scheme: TagScheme,
) -> Result<Vec<EntitySpan>, EvalError> {
    let labels = sentence.labels();
    if !scheme.is_valid(&labels) {
        return Err(EvalError::InvalidLabels {
            corpus: "input",
            sentence: sentence_index,
            scheme,
        });
    }
    Ok(scheme
        .decode(&labels)
        .into_iter()
        .map(|c| EntitySpan::from_chunk(sentence_index, c))
        .collect())
}

/// All entities of `corpus`, sentence by sentence.
pub fn corpus_entities(corpus: &Corpus) -> Result<Vec<EntitySpan>, EvalError> {
    let mut out = Vec::new();
    for (i, s) in corpus.sentences.iter().enumerate() {
        out.extend(extract_entities(s, i, corpus.scheme)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn metrics(self) -> Metrics {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub overall: Metrics,
    pub per_type: BTreeMap<EntityType, Metrics>,
    #[serde(skip)]
    pub tokens: usize,
    #[serde(skip)]
    pub correct_tags: usize,
}

impl EvalReport {
    fn from_counts(per_type: &BTreeMap<EntityType, Counts>, tokens: usize, correct_tags: usize) -> Self {
        let mut overall = Counts::default();
        for c in per_type.values() {
            overall.add(*c);
        }
        EvalReport {
            overall: overall.metrics(),
            per_type: per_type.iter().map(|(&t, &c)| (t, c.metrics())).collect(),
            tokens,
            correct_tags,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Checks that both corpora have the same sentences and token surfaces.
pub(crate) fn check_structure(gold: &Corpus, pred: &Corpus) -> Result<(), EvalError> {
    for (i, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::StructureMismatch {
                sentence: i,
                reason: format!("{} gold tokens vs {} predicted", g.len(), p.len()),
            });
        }
        if let Some(k) = g.tokens.iter().zip(&p.tokens).position(|(a, b)| a.surface() != b.surface()) {
            return Err(EvalError::StructureMismatch {
                sentence: i,
                reason: format!(
                    "token {k} is {:?} in gold but {:?} in prediction",
                    g.tokens[k].surface(),
                    p.tokens[k].surface()
                ),
            });
        }
    }
    if gold.len() != pred.len() {
        return Err(EvalError::StructureMismatch {
            sentence: gold.len().min(pred.len()),
            reason: format!("{} gold sentences vs {} predicted", gold.len(), pred.len()),
        });
    }
    Ok(())
}

pub(crate) fn sentence_spans(corpus: &Corpus, which: &'static str) -> Result<Vec<Vec<EntitySpan>>, EvalError> {
    corpus
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            extract_entities(s, i, corpus.scheme).map_err(|_| EvalError::InvalidLabels {
                corpus: which,
                sentence: i,
                scheme: corpus.scheme,
            })
        })
        .collect()
}

/// Exact-match counts for one sentence's gold and predicted spans.
pub(crate) fn count_sentence(gold: &[EntitySpan], pred: &[EntitySpan], into: &mut BTreeMap<EntityType, Counts>) {
    let gold_set: BTreeSet<&EntitySpan> = gold.iter().collect();
    let pred_set: BTreeSet<&EntitySpan> = pred.iter().collect();
    for p in pred {
        let c = into.entry(p.entity_type).or_default();
        if gold_set.contains(p) {
            c.tp += 1;
        } else {
            c.fp += 1;
        }
    }
    for g in gold {
        if !pred_set.contains(g) {
            into.entry(g.entity_type).or_default().fn_ += 1;
        }
    }
}

fn tag_agreement(gold: &Corpus, pred: &Corpus) -> (usize, usize) {
    let mut tokens = 0;
    let mut correct = 0;
    for (g, p) in gold.sentences.iter().zip(&pred.sentences) {
        for (a, b) in g.tokens.iter().zip(&p.tokens) {
            tokens += 1;
            correct += usize::from(a.label.entity_type() == b.label.entity_type());
        }
    }
    (tokens, correct)
}

/// Scores `pred` against `gold`. A predicted entity counts only if its
/// boundaries and type both equal a gold entity; overall figures are
/// micro-averaged.
pub fn evaluate(gold: &Corpus, pred: &Corpus) -> Result<EvalReport, EvalError> {
    check_structure(gold, pred)?;
    let g = sentence_spans(gold, "gold")?;
    let p = sentence_spans(pred, "prediction")?;
    let mut counts = BTreeMap::new();
    for (gs, ps) in g.iter().zip(&p) {
        count_sentence(gs, ps, &mut counts);
    }
    let (tokens, correct) = tag_agreement(gold, pred);
    Ok(EvalReport::from_counts(&counts, tokens, correct))
}

/// Scores only the gold entities marked in `flagged`.
///
/// Exact matches of flagged gold entities are true positives. Predictions
/// that overlap a flagged gold entity without matching it are false
/// positives; predictions disjoint from every flagged entity are ignored.
pub fn evaluate_subset(gold: &Corpus, pred: &Corpus, flagged: &EntityFlags) -> Result<EvalReport, EvalError> {
    check_structure(gold, pred)?;
    let g = sentence_spans(gold, "gold")?;
    let p = sentence_spans(pred, "prediction")?;
    let mut counts: BTreeMap<EntityType, Counts> = BTreeMap::new();
    for (gs, ps) in g.iter().zip(&p) {
        let mut targets = Vec::new();
        for span in gs {
            match flagged.get(span) {
                Some(true) => targets.push(*span),
                Some(false) => {}
                None => return Err(EvalError::MissingFlag(*span)),
            }
        }
        let mut matched = BTreeSet::new();
        for ps in ps {
            if let Some(hit) = targets.iter().find(|t| *t == ps) {
                counts.entry(ps.entity_type).or_default().tp += 1;
                matched.insert(*hit);
            } else if targets.iter().any(|t| t.overlaps(ps)) {
                counts.entry(ps.entity_type).or_default().fp += 1;
            }
        }
        for t in targets.iter().filter(|t| !matched.contains(*t)) {
            counts.entry(t.entity_type).or_default().fn_ += 1;
        }
    }
    let tokens = gold.token_count();
    Ok(EvalReport::from_counts(&counts, tokens, 0))
}
