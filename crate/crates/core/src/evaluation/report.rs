use std::fmt::Write as _;

use super::{EvalReport, Metrics};

impl EvalReport {
    /// Plain-text summary laid out like `conlleval` output.
    pub fn to_table(&self) -> String {
        let o = &self.overall;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "processed {} tokens with {} phrases; found: {} phrases; correct: {}.",
            self.tokens,
            o.tp + o.fn_,
            o.tp + o.fp,
            o.tp
        );
        let accuracy = if self.tokens == 0 {
            0.0
        } else {
            100.0 * self.correct_tags as f64 / self.tokens as f64
        };
        let _ = writeln!(out, "accuracy: {accuracy:6.2}%; {}", row(o));
        for (t, m) in &self.per_type {
            let _ = writeln!(out, "{:>17}: {}  {}", t.as_str(), row(m), m.tp + m.fp);
        }
        out
    }
}

fn row(m: &Metrics) -> String {
    format!(
        "precision: {:6.2}%; recall: {:6.2}%; FB1: {:6.2}",
        100.0 * m.precision,
        100.0 * m.recall,
        100.0 * m.f1
    )
}
