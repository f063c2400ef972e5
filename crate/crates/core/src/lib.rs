//! Corpus tooling for named entity recognition on OCR'd historical text.
//!
//! The crate covers four stages of a data-centric adaptation pipeline:
//!
//! - [`conll`]: reading, validating, converting, splitting and sampling
//!   CoNLL-formatted NER corpora.
//! - [`corruption`] and [`ocr`]: injecting character noise into clean
//!   corpora, either as single-edit word corruptions or as OCR-like
//!   recognition errors.
//! - [`alignment`]: windowed Wagner-Fischer alignment of clean and noisy text
//!   and projection of entity labels onto the noisy tokens.
//! - [`evaluation`]: exact-match chunk scoring, scoring restricted to entities
//!   damaged by OCR, and approximate randomization significance tests.
//!
//! Every stochastic operation takes an explicit seed and is a pure function of
//! its inputs.

pub mod alignment;
pub mod conll;
pub mod corruption;
pub mod evaluation;
pub mod ocr;
pub mod seed;

pub use conll::{Corpus, EntityType, Label, Sentence, TagScheme, Token};
