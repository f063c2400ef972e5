//! Approximate randomization test on the overall F1 difference.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::Serialize;

use super::{check_structure, count_sentence, sentence_spans, Counts, EvalError};
use crate::conll::Corpus;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigTestResult {
    /// `|F1(a) - F1(b)|` on the unshuffled predictions.
    pub observed_diff: f64,
    /// `(r + 1) / (R + 1)`, where `r` of `R` resamples reached the observed
    /// difference.
    pub p_value: f64,
    pub iterations: usize,
    pub seed: u64,
}

fn sentence_counts(gold: &Corpus, pred: &Corpus, which: &'static str) -> Result<Vec<Counts>, EvalError> {
    let g = sentence_spans(gold, "gold")?;
    let p = sentence_spans(pred, which)?;
    Ok(g.iter()
        .zip(&p)
        .map(|(gs, ps)| {
            let mut per_type = BTreeMap::new();
            count_sentence(gs, ps, &mut per_type);
            let mut total = Counts::default();
            for c in per_type.values() {
                total.add(*c);
            }
            total
        })
        .collect())
}

fn f1(c: Counts) -> f64 {
    c.metrics().f1
}

/// Tests whether two systems' overall F1 scores differ.
///
/// Each resample swaps the two systems' outputs sentence by sentence with
/// probability 1/2. Iteration `k` draws from a generator keyed by
/// `(seed, k)`, and a swap exchanges the roles of both systems, so the
/// p-value is unchanged when `pred_a` and `pred_b` are exchanged.
pub fn significance_test(
    gold: &Corpus,
    pred_a: &Corpus,
    pred_b: &Corpus,
    iterations: usize,
    seed: u64,
) -> Result<SigTestResult, EvalError> {
    check_structure(gold, pred_a)?;
    check_structure(gold, pred_b)?;
    let a = sentence_counts(gold, pred_a, "prediction A")?;
    let b = sentence_counts(gold, pred_b, "prediction B")?;

    let sum = |v: &[Counts]| {
        let mut t = Counts::default();
        for c in v {
            t.add(*c);
        }
        t
    };
    let observed_diff = (f1(sum(&a)) - f1(sum(&b))).abs();

    let mut at_least = 0usize;
    for k in 0..iterations {
        let mut rng = seed::rng(seed, &[k as u64]);
        let (mut x, mut y) = (Counts::default(), Counts::default());
        for (ca, cb) in a.iter().zip(&b) {
            if rng.gen_bool(0.5) {
                x.add(*cb);
                y.add(*ca);
            } else {
                x.add(*ca);
                y.add(*cb);
            }
        }
        let stat = (f1(x) - f1(y)).abs();
        if stat + 1e-12 >= observed_diff {
            at_least += 1;
        }
    }

    Ok(SigTestResult {
        observed_diff,
        p_value: (at_least + 1) as f64 / (iterations + 1) as f64,
        iterations,
        seed,
    })
}
