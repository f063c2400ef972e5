use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{ConllError, Corpus, EntityType, Sentence, TagScheme};
use crate::seed;

fn relabel(sentence: &mut Sentence, from: TagScheme, to: TagScheme, map: impl Fn(EntityType) -> Option<EntityType>) {
    let chunks: Vec<_> = from
        .decode(&sentence.labels())
        .into_iter()
        .filter_map(|mut c| {
            c.entity_type = map(c.entity_type)?;
            Some(c)
        })
        .collect();
    let labels = to.encode(sentence.len(), &chunks);
    for (t, l) in sentence.tokens.iter_mut().zip(labels) {
        t.label = l;
    }
}

/// Re-encodes every sentence under `target`. Chunks are preserved exactly
/// between IOB1 and IOB2; converting to IO merges adjacent same-type chunks.
pub fn convert_scheme(corpus: &Corpus, target: TagScheme) -> Corpus {
    let mut out = corpus.clone();
    for s in &mut out.sentences {
        relabel(s, corpus.scheme, target, Some);
    }
    out.scheme = target;
    out
}

/// Entity type remapping; `None` drops the type (its tokens become `O`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagMapping(BTreeMap<EntityType, Option<EntityType>>);

impl TagMapping {
    pub fn identity() -> Self {
        TagMapping(EntityType::ALL.iter().map(|&t| (t, Some(t))).collect())
    }

    /// PER/ORG/LOC kept, MISC dropped.
    pub fn europeana() -> Self {
        Self::identity().set(EntityType::Misc, None)
    }

    pub fn set(mut self, from: EntityType, to: Option<EntityType>) -> Self {
        self.0.insert(from, to);
        self
    }

    /// Parses `FROM=TO` pairs separated by commas; `TO` may be `drop` or `O`.
    /// Types not mentioned map to themselves.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut m = Self::identity();
        for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (from, to) = pair
                .split_once('=')
                .ok_or_else(|| format!("expected FROM=TO, got {pair:?}"))?;
            let from: EntityType = from.trim().parse()?;
            let to = match to.trim() {
                "drop" | "O" => None,
                t => Some(t.parse()?),
            };
            m = m.set(from, to);
        }
        Ok(m)
    }

    pub fn apply(&self, t: EntityType) -> Option<EntityType> {
        self.0.get(&t).copied().unwrap_or(Some(t))
    }
}

/// Remaps entity types chunk by chunk and re-encodes under the corpus scheme,
/// so the result is valid (e.g. a `B-` made redundant by a dropped neighbour
/// becomes `I-` under IOB1).
pub fn map_tagset(corpus: &Corpus, mapping: &TagMapping) -> Corpus {
    let mut out = corpus.clone();
    for s in &mut out.sentences {
        relabel(s, corpus.scheme, corpus.scheme, |t| mapping.apply(t));
    }
    out
}

/// Contiguous split in document order. The first `floor(n * train)`
/// sentences go to train, the next `floor(n * dev)` to dev, the rest to test.
pub fn split_corpus(
    corpus: &Corpus,
    ratios: (f64, f64, f64),
) -> Result<(Corpus, Corpus, Corpus), ConllError> {
    let (train, dev, test) = ratios;
    let ok = [train, dev, test].iter().all(|r| r.is_finite() && *r > 0.0)
        && ((train + dev + test) - 1.0).abs() <= 1e-9;
    if !ok {
        return Err(ConllError::InvalidRatios(ratios));
    }
    let n = corpus.len();
    // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
    let count = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let n_train = count(train).min(n);
    let n_dev = count(dev).min(n - n_train);

    let part = |range: std::ops::Range<usize>| Corpus {
        sentences: corpus.sentences[range].to_vec(),
        scheme: corpus.scheme,
        language: corpus.language.clone(),
    };
    Ok((
        part(0..n_train),
        part(n_train..n_train + n_dev),
        part(n_train + n_dev..n),
    ))
}

/// Sentence-wise sampling without replacement.
///
/// Sentences are drawn in a seeded uniformly random order and kept until the
/// next draw would push the token count past `target_tokens`. The kept
/// sentences are returned in their original order.
pub fn downsample(corpus: &Corpus, target_tokens: usize, seed: u64) -> Corpus {
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut seed::rng(seed, &[]));

    let mut total = 0;
    let mut keep = Vec::new();
    for idx in order {
        let len = corpus.sentences[idx].len();
        if total + len > target_tokens {
            break;
        }
        total += len;
        keep.push(idx);
    }
    keep.sort_unstable();

    Corpus {
        sentences: keep.into_iter().map(|i| corpus.sentences[i].clone()).collect(),
        scheme: corpus.scheme,
        language: corpus.language.clone(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub token_count: usize,
    pub sentence_count: usize,
    pub entity_counts: BTreeMap<EntityType, usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        sentence_count: corpus.len(),
        token_count: corpus.token_count(),
        entity_counts: BTreeMap::new(),
    };
    for s in &corpus.sentences {
        for c in corpus.scheme.decode(&s.labels()) {
            *stats.entity_counts.entry(c.entity_type).or_default() += 1;
        }
    }
    stats
}
