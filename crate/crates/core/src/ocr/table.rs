use std::collections::BTreeMap;

use rand::Rng as _;

use super::OcrError;
use crate::seed;

const BUILTIN: &str = include_str!("../../data/confusions.tsv");

/// Weighted OCR confusions keyed by one- or two-character source strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubstitutionTable(BTreeMap<String, Vec<(String, f64)>>);

impl SubstitutionTable {
    /// Classic confusions: e/c, l/1, o/0, rn and in to m, f/t, h to b.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in confusion table is well formed")
    }

    /// Parses `source<TAB>replacement<TAB>weight` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, OcrError> {
        let mut map: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| OcrError::Table {
                line: line_no,
                message,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [source, replacement, weight] = fields[..] else {
                return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            let n = source.chars().count();
            if !(1..=2).contains(&n) || source.chars().any(char::is_whitespace) {
                return Err(err(format!("source {source:?} must be 1 or 2 non-space characters")));
            }
            if replacement.is_empty() || replacement.chars().any(char::is_whitespace) {
                return Err(err(format!("replacement {replacement:?} must be non-empty without spaces")));
            }
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| err(format!("weight {weight:?} is not a number")))?;
            if !(weight.is_finite() && weight > 0.0) {
                return Err(err(format!("weight {weight} must be positive")));
            }
            map.entry(source.to_string())
                .or_default()
                .push((replacement.to_string(), weight));
        }
        Ok(SubstitutionTable(map))
    }

    pub fn get(&self, source: &str) -> Option<&[(String, f64)]> {
        self.0.get(source).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(super) fn choose<'a>(choices: &'a [(String, f64)], rng: &mut seed::Rng) -> &'a str {
    let total: f64 = choices.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen::<f64>() * total;
    for (r, w) in choices {
        if x < *w {
            return r;
        }
        x -= w;
    }
    &choices[choices.len() - 1].0
}
