//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use noisyner::{Corpus, EntityType, Label, Sentence, TagScheme, Token};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A typed token range `[start, end]`.
pub type Span = (usize, usize, EntityType);

const TYPES: [EntityType; 4] = [EntityType::Per, EntityType::Org, EntityType::Loc, EntityType::Misc];

/// Up to `max_entities` random non-overlapping spans in a sentence of `len`
/// tokens, sorted. Adjacent spans are allowed.
pub fn random_spans(rng: &mut impl Rng, len: usize, max_entities: usize) -> Vec<Span> {
    let mut spans: Vec<Span> = Vec::new();
    let want = rng.gen_range(0..=max_entities);
    for _ in 0..want * 4 {
        if spans.len() == want || len == 0 {
            break;
        }
        let start = rng.gen_range(0..len);
        let end = (start + rng.gen_range(0..3)).min(len - 1);
        if spans.iter().all(|&(s, e, _)| end < s || start > e) {
            spans.push((start, end, *TYPES.choose(rng).unwrap()));
        }
    }
    spans.sort();
    spans
}

/// Straightforward IOB1/IOB2 encoding of known spans.
pub fn encode(len: usize, spans: &[Span], scheme: TagScheme) -> Vec<Label> {
    let mut labels = vec![Label::Outside; len];
    for (k, &(s, e, t)) in spans.iter().enumerate() {
        for l in &mut labels[s..=e] {
            *l = Label::Inside(t);
        }
        let adjacent_same = k > 0 && spans[k - 1].1 + 1 == s && spans[k - 1].2 == t;
        let begin = match scheme {
            TagScheme::Iob2 => true,
            TagScheme::Iob1 => adjacent_same,
            TagScheme::Io => false,
        };
        if begin {
            labels[s] = Label::Begin(t);
        }
    }
    labels
}

pub fn sentence_from(words: &[String], labels: &[Label]) -> Sentence {
    Sentence::new(
        words
            .iter()
            .zip(labels)
            .map(|(w, l)| Token::new(w.clone(), *l).unwrap())
            .collect(),
    )
}

const WORDS: &[&str] = &[
    "le", "la", "de", "des", "maire", "ville", "journal", "rue", "Paris", "Lyon", "Jean", "Marie",
    "conseil", "général", "hier", "soir", "été", "très", "société", "van", "het", "huis", "Leiden",
    "Amsterdam", "gemeente", "raad", "Jansen", "De", "Vries", "koning", "1887", ",", ".", "-",
];

pub fn random_word(rng: &mut impl Rng) -> String {
    WORDS.choose(rng).unwrap().to_string()
}

/// Random valid corpus with `sentences` sentences of 1..=max_len tokens.
pub fn random_corpus(rng: &mut impl Rng, sentences: usize, max_len: usize, scheme: TagScheme) -> (Corpus, Vec<Vec<Span>>) {
    let mut out = Vec::new();
    let mut all_spans = Vec::new();
    for _ in 0..sentences {
        let len = rng.gen_range(1..=max_len);
        let words: Vec<String> = (0..len).map(|_| random_word(rng)).collect();
        let spans = random_spans(rng, len, 3);
        out.push(sentence_from(&words, &encode(len, &spans, scheme)));
        all_spans.push(spans);
    }
    (Corpus::new(out, scheme), all_spans)
}

/// Minimal unit-cost edit distance as the cheapest chain of equal-character
/// anchors: between consecutive anchors, `x` clean and `y` noisy characters
/// are bridged at cost `max(x, y)` (substitutions plus the indel surplus).
/// Computed as a shortest path over all anchor pairs, without the
/// Wagner-Fischer recurrence.
pub fn chain_distance(a: &[char], b: &[char]) -> u64 {
    let mut nodes: Vec<(isize, isize)> = vec![(-1, -1)];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            if ca == cb {
                nodes.push((i as isize, j as isize));
            }
        }
    }
    nodes.push((a.len() as isize, b.len() as isize));
    nodes.sort();
    let mut best = vec![u64::MAX; nodes.len()];
    best[0] = 0;
    for q in 1..nodes.len() {
        for p in 0..q {
            let (pi, pj) = nodes[p];
            let (qi, qj) = nodes[q];
            if pi < qi && pj < qj && best[p] != u64::MAX {
                let gap = ((qi - pi - 1).max(qj - pj - 1)) as u64;
                best[q] = best[q].min(best[p] + gap);
            }
        }
    }
    best[nodes.len() - 1]
}

/// Edit distance by plain recursion over all edit scripts (exponential;
/// short inputs only).
pub fn naive_distance(a: &[char], b: &[char]) -> u64 {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len() as u64,
        (_, None) => a.len() as u64,
        (Some((x, ra)), Some((y, rb))) => {
            let diag = naive_distance(ra, rb) + u64::from(x != y);
            let del = naive_distance(ra, b) + 1;
            let ins = naive_distance(a, rb) + 1;
            diag.min(del).min(ins)
        }
    }
}

/// (tp, fp, fn) by comparing every predicted span with every gold span.
pub fn brute_force_counts(gold: &[Span], pred: &[Span]) -> (usize, usize, usize) {
    let mut tp = 0;
    for p in pred {
        if gold.iter().any(|g| g == p) {
            tp += 1;
        }
    }
    let fp = pred.len() - tp;
    let matched_gold = gold.iter().filter(|g| pred.iter().any(|p| p == *g)).count();
    (tp, fp, gold.len() - matched_gold)
}

/// Random text of roughly `len` characters: words separated by spaces,
/// sentences ended by newlines.
pub fn random_text(rng: &mut impl Rng, len: usize) -> String {
    let mut s = String::new();
    while s.chars().count() < len {
        s.push_str(&random_word(rng));
        if rng.gen_bool(0.08) {
            s.push('\n');
        } else {
            s.push(' ');
        }
    }
    s
}

/// Applies character noise at `rate` per character (substitution,
/// insertion or deletion, never touching newlines).
pub fn add_noise(rng: &mut impl Rng, text: &str, rate: f64) -> String {
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzéè.,'".chars().collect();
    let mut out = String::new();
    for c in text.chars() {
        if c == '\n' || !rng.gen_bool(rate) {
            out.push(c);
            continue;
        }
        match rng.gen_range(0..3) {
            0 => out.push(*alphabet.choose(rng).unwrap()),
            1 => {
                out.push(c);
                out.push(*alphabet.choose(rng).unwrap());
            }
            _ => {}
        }
    }
    out
}
