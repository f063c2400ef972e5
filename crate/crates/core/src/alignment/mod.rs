//! Character alignment of clean and noisy text.
//!
//! [`wagner_fischer`] computes an optimal edit path between two strings;
//! [`windowed_align`] stitches window-sized optimal paths together so long
//! documents can be aligned in bounded memory; [`transfer_labels`] uses the
//! resulting path to label the noisy tokens.

mod transfer;
mod wagner_fischer;
mod window;

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

pub use transfer::{align_and_transfer, flag_entity_ocr_errors, transfer_labels, EntityFlags, TransferError};
pub use wagner_fischer::{align_chars, wagner_fischer, CostScheme};
pub use window::{windowed_align, LowQualityRegion, WindowConfig, WindowConfigError, WindowedAlignment};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("alignment path does not cover the texts: {0}")]
    Coverage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Match,
    Substitute,
    Delete,
    Insert,
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EditKind::Match => "match",
            EditKind::Substitute => "substitute",
            EditKind::Delete => "delete",
            EditKind::Insert => "insert",
        })
    }
}

/// One step of an alignment. Positions are character indices into the
/// clean and noisy texts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditOp {
    Match { clean: usize, noisy: usize },
    Substitute { clean: usize, noisy: usize },
    /// A clean character with no noisy counterpart.
    Delete { clean: usize },
    /// A noisy character with no clean counterpart.
    Insert { noisy: usize },
}

impl EditOp {
    pub fn kind(self) -> EditKind {
        match self {
            EditOp::Match { .. } => EditKind::Match,
            EditOp::Substitute { .. } => EditKind::Substitute,
            EditOp::Delete { .. } => EditKind::Delete,
            EditOp::Insert { .. } => EditKind::Insert,
        }
    }

    pub fn clean_pos(self) -> Option<usize> {
        match self {
            EditOp::Match { clean, .. } | EditOp::Substitute { clean, .. } | EditOp::Delete { clean } => {
                Some(clean)
            }
            EditOp::Insert { .. } => None,
        }
    }

    pub fn noisy_pos(self) -> Option<usize> {
        match self {
            EditOp::Match { noisy, .. } | EditOp::Substitute { noisy, .. } | EditOp::Insert { noisy } => {
                Some(noisy)
            }
            EditOp::Delete { .. } => None,
        }
    }

    fn shifted(self, dc: usize, dn: usize) -> Self {
        match self {
            EditOp::Match { clean, noisy } => EditOp::Match {
                clean: clean + dc,
                noisy: noisy + dn,
            },
            EditOp::Substitute { clean, noisy } => EditOp::Substitute {
                clean: clean + dc,
                noisy: noisy + dn,
            },
            EditOp::Delete { clean } => EditOp::Delete { clean: clean + dc },
            EditOp::Insert { noisy } => EditOp::Insert { noisy: noisy + dn },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentPath {
    pub ops: Vec<EditOp>,
    pub total_cost: u64,
}

impl AlignmentPath {
    /// Checks that the path is monotone and covers every clean and noisy
    /// index exactly once.
    pub fn validate(&self, clean_len: usize, noisy_len: usize) -> Result<(), AlignError> {
        let (mut c, mut n) = (0, 0);
        for (k, op) in self.ops.iter().enumerate() {
            if let Some(p) = op.clean_pos() {
                if p != c {
                    return Err(AlignError::Coverage(format!(
                        "op {k}: clean position {p}, expected {c}"
                    )));
                }
                c += 1;
            }
            if let Some(p) = op.noisy_pos() {
                if p != n {
                    return Err(AlignError::Coverage(format!(
                        "op {k}: noisy position {p}, expected {n}"
                    )));
                }
                n += 1;
            }
        }
        if (c, n) != (clean_len, noisy_len) {
            return Err(AlignError::Coverage(format!(
                "path covers {c}/{clean_len} clean and {n}/{noisy_len} noisy characters"
            )));
        }
        Ok(())
    }

    /// Sum of per-op costs under `costs`.
    pub fn cost_under(&self, costs: &CostScheme) -> u64 {
        self.ops.iter().map(|&op| u64::from(costs.op_cost(op))).sum()
    }

    /// Diagnostic dump, one op per line: `kind<TAB>clean_pos<TAB>noisy_pos`,
    /// with `-` for an absent position.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let pos = |p: Option<usize>| p.map_or_else(|| "-".to_string(), |p| p.to_string());
        for op in &self.ops {
            let _ = writeln!(out, "{}\t{}\t{}", op.kind(), pos(op.clean_pos()), pos(op.noisy_pos()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_detects_gaps() {
        let ok = AlignmentPath {
            ops: vec![
                EditOp::Match { clean: 0, noisy: 0 },
                EditOp::Delete { clean: 1 },
                EditOp::Insert { noisy: 1 },
            ],
            total_cost: 2,
        };
        assert!(ok.validate(2, 2).is_ok());
        assert!(ok.validate(3, 2).is_err());
        let skip = AlignmentPath {
            ops: vec![EditOp::Match { clean: 1, noisy: 0 }],
            total_cost: 0,
        };
        assert!(skip.validate(2, 1).is_err());
    }

    #[test]
    fn dump_format() {
        let p = AlignmentPath {
            ops: vec![
                EditOp::Substitute { clean: 0, noisy: 0 },
                EditOp::Insert { noisy: 1 },
                EditOp::Delete { clean: 1 },
            ],
            total_cost: 3,
        };
        assert_eq!(p.dump(), "substitute\t0\t0\ninsert\t-\t1\ndelete\t1\t-\n");
    }
}
