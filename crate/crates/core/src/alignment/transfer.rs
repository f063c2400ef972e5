use std::collections::BTreeMap;

use super::{windowed_align, AlignError, AlignmentPath, CostScheme, EditOp, WindowConfig, WindowConfigError, WindowedAlignment};
use crate::conll::{Chunk, Corpus, EntityType, Sentence, TagScheme, Token};
use crate::evaluation::EntitySpan;

/// Per-entity OCR damage flags, keyed by the entity's span.
pub type EntityFlags = BTreeMap<EntitySpan, bool>;

struct CleanToken {
    surface: String,
    /// Global entity index and type, if the token is inside an entity.
    entity: Option<(usize, EntityType)>,
}

fn clean_tokens(corpus: &Corpus) -> (Vec<CleanToken>, Vec<Option<usize>>) {
    let mut tokens = Vec::with_capacity(corpus.token_count());
    let mut owner = Vec::new();
    let mut entity_id = 0;
    for sentence in &corpus.sentences {
        let mut entity = vec![None; sentence.len()];
        for c in corpus.scheme.decode(&sentence.labels()) {
            for e in &mut entity[c.start..=c.end] {
                *e = Some((entity_id, c.entity_type));
            }
            entity_id += 1;
        }
        for (ti, token) in sentence.tokens.iter().enumerate() {
            if ti > 0 {
                owner.push(None);
            }
            let idx = tokens.len();
            owner.extend(std::iter::repeat(Some(idx)).take(token.surface().chars().count()));
            tokens.push(CleanToken {
                surface: token.surface().to_string(),
                entity: entity[ti],
            });
        }
        owner.push(None);
    }
    (tokens, owner)
}

/// Labels the tokens of `noisy_text` from `clean_corpus` through `path`.
///
/// The noisy text is split into sentences at newlines and into tokens at
/// whitespace. Each noisy token takes the entity of the clean token it shares
/// the most aligned characters with (ties go to the earlier clean token);
/// tokens aligned only to insertions or whitespace are outside any entity.
/// Consecutive noisy tokens drawn from the same clean entity form one entity,
/// and the result is encoded as IOB1. A token's `ocr_error` flag is set when
/// its surface differs from its source token's surface, or when it has no
/// source token. Lines without tokens are dropped.
pub fn transfer_labels(clean_corpus: &Corpus, noisy_text: &str, path: &AlignmentPath) -> Result<Corpus, AlignError> {
    let noisy: Vec<char> = noisy_text.chars().collect();
    let (tokens, owner) = clean_tokens(clean_corpus);
    path.validate(owner.len(), noisy.len())?;

    let mut source = vec![None; noisy.len()];
    for op in &path.ops {
        if let EditOp::Match { clean, noisy } | EditOp::Substitute { clean, noisy } = *op {
            source[noisy] = owner[clean];
        }
    }

    let mut sentences = Vec::new();
    let mut current: Vec<(Token, Option<(usize, EntityType)>)> = Vec::new();
    let mut flush = |current: &mut Vec<(Token, Option<(usize, EntityType)>)>| {
        if current.is_empty() {
            return;
        }
        let mut chunks: Vec<Chunk> = Vec::new();
        let mut last: Option<usize> = None;
        for (k, (_, entity)) in current.iter().enumerate() {
            match *entity {
                Some((id, _)) if last == Some(id) => {
                    chunks.last_mut().expect("open chunk").end = k;
                }
                Some((id, entity_type)) => {
                    chunks.push(Chunk {
                        start: k,
                        end: k,
                        entity_type,
                    });
                    last = Some(id);
                }
                None => last = None,
            }
        }
        let labels = TagScheme::Iob1.encode(current.len(), &chunks);
        let tokens = current
            .drain(..)
            .zip(labels)
            .map(|((mut tok, _), l)| {
                tok.label = l;
                tok
            })
            .collect();
        sentences.push(Sentence::new(tokens));
    };

    let mut k = 0;
    while k < noisy.len() {
        let c = noisy[k];
        if c == '\n' {
            flush(&mut current);
            k += 1;
            continue;
        }
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        while k < noisy.len() && !noisy[k].is_whitespace() {
            k += 1;
        }
        let surface: String = noisy[start..k].iter().collect();

        // Overlap counts per clean token; token ids grow along the path, so
        // a small ordered list suffices.
        let mut overlap: Vec<(usize, usize)> = Vec::new();
        for src in source[start..k].iter().flatten() {
            match overlap.iter_mut().find(|(t, _)| t == src) {
                Some((_, n)) => *n += 1,
                None => overlap.push((*src, 1)),
            }
        }
        let best = overlap
            .iter()
            .copied()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(t, _)| t);

        let (entity, ocr_error) = match best {
            Some(t) => (tokens[t].entity, tokens[t].surface != surface),
            None => (None, true),
        };
        let token = Token::new(surface, crate::conll::Label::Outside)
            .expect("whitespace-delimited token")
            .with_ocr_error(ocr_error);
        current.push((token, entity));
    }
    flush(&mut current);

    Ok(Corpus {
        sentences,
        scheme: TagScheme::Iob1,
        language: clean_corpus.language.clone(),
    })
}

/// Aligns `noisy_text` against the plain text of `clean_corpus` with
/// [`windowed_align`] and transfers the labels.
pub fn align_and_transfer(
    clean_corpus: &Corpus,
    noisy_text: &str,
    config: &WindowConfig,
) -> Result<(Corpus, WindowedAlignment), TransferError> {
    let clean: Vec<char> = clean_corpus.plain_text().chars().collect();
    let noisy: Vec<char> = noisy_text.chars().collect();
    let alignment = windowed_align(&clean, &noisy, config, &CostScheme::default())?;
    let labeled = transfer_labels(clean_corpus, noisy_text, &alignment.path)?;
    Ok((labeled, alignment))
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TransferError {
    #[error(transparent)]
    Window(#[from] WindowConfigError),
    #[error(transparent)]
    Align(#[from] AlignError),
}

/// Flags every entity of `corpus` that contains at least one token marked
/// with an OCR error.
pub fn flag_entity_ocr_errors(corpus: &Corpus) -> EntityFlags {
    let mut flags = EntityFlags::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        for c in corpus.scheme.decode(&sentence.labels()) {
            let damaged = sentence.tokens[c.start..=c.end].iter().any(|t| t.ocr_error);
            flags.insert(EntitySpan::from_chunk(si, c), damaged);
        }
    }
    flags
}
