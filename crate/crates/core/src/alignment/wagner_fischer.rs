use super::{AlignmentPath, EditOp};

/// Edit costs. Matches cost 0.
///
/// With `anchor_newlines` set, a newline may only be matched, deleted or
/// inserted, never substituted for (or by) another character. This keeps
/// sentence breaks of the clean text aligned with line breaks of the noisy
/// text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostScheme {
    pub substitute: u32,
    pub insert: u32,
    pub delete: u32,
    pub anchor_newlines: bool,
}

impl Default for CostScheme {
    fn default() -> Self {
        CostScheme {
            substitute: 1,
            insert: 1,
            delete: 1,
            anchor_newlines: true,
        }
    }
}

impl CostScheme {
    pub fn op_cost(&self, op: EditOp) -> u32 {
        match op {
            EditOp::Match { .. } => 0,
            EditOp::Substitute { .. } => self.substitute,
            EditOp::Delete { .. } => self.delete,
            EditOp::Insert { .. } => self.insert,
        }
    }

    #[inline]
    fn diagonal(&self, a: char, b: char) -> Option<u32> {
        if a == b {
            Some(0)
        } else if self.anchor_newlines && (a == '\n' || b == '\n') {
            None
        } else {
            Some(self.substitute)
        }
    }
}

const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

/// Optimal alignment of `clean` against `noisy`, with positions offset by
/// `clean_offset` and `noisy_offset`.
///
/// Costs are kept in two rolling rows; only one traceback byte per cell is
/// stored. Ties prefer match/substitute, then delete, then insert.
pub fn align_chars(
    clean: &[char],
    noisy: &[char],
    costs: &CostScheme,
    clean_offset: usize,
    noisy_offset: usize,
) -> AlignmentPath {
    let (n, m) = (clean.len(), noisy.len());
    let width = m + 1;
    let mut dirs = vec![LEFT; (n + 1) * width];
    let mut prev: Vec<u64> = (0..=m as u64).map(|j| j * u64::from(costs.insert)).collect();
    let mut cur = vec![0u64; width];

    for i in 1..=n {
        cur[0] = i as u64 * u64::from(costs.delete);
        dirs[i * width] = UP;
        let a = clean[i - 1];
        let row = &mut dirs[i * width..(i + 1) * width];
        for j in 1..=m {
            let mut best = prev[j] + u64::from(costs.delete);
            let mut dir = UP;
            if let Some(c) = costs.diagonal(a, noisy[j - 1]) {
                let d = prev[j - 1] + u64::from(c);
                if d <= best {
                    best = d;
                    dir = DIAG;
                }
            }
            let l = cur[j - 1] + u64::from(costs.insert);
            if l < best {
                best = l;
                dir = LEFT;
            }
            cur[j] = best;
            row[j] = dir;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let total_cost = prev[m];

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let op = match dirs[i * width + j] {
            DIAG => {
                i -= 1;
                j -= 1;
                if clean[i] == noisy[j] {
                    EditOp::Match { clean: i, noisy: j }
                } else {
                    EditOp::Substitute { clean: i, noisy: j }
                }
            }
            UP => {
                i -= 1;
                EditOp::Delete { clean: i }
            }
            _ => {
                j -= 1;
                EditOp::Insert { noisy: j }
            }
        };
        ops.push(op.shifted(clean_offset, noisy_offset));
    }
    ops.reverse();
    AlignmentPath { ops, total_cost }
}

/// Minimal-cost alignment of two whole strings.
pub fn wagner_fischer(clean: &str, noisy: &str, costs: &CostScheme) -> AlignmentPath {
    let a: Vec<char> = clean.chars().collect();
    let b: Vec<char> = noisy.chars().collect();
    align_chars(&a, &b, costs, 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::EditKind;

    fn kinds(p: &AlignmentPath) -> Vec<EditKind> {
        p.ops.iter().map(|o| o.kind()).collect()
    }

    #[test]
    fn empty_clean() {
        let p = wagner_fischer("", "abc", &CostScheme::default());
        assert_eq!(p.total_cost, 3);
        assert_eq!(kinds(&p), vec![EditKind::Insert; 3]);
        let p = wagner_fischer("", "", &CostScheme::default());
        assert_eq!(p.total_cost, 0);
        assert!(p.ops.is_empty());
    }

    #[test]
    fn identical() {
        let p = wagner_fischer("abc", "abc", &CostScheme::default());
        assert_eq!(p.total_cost, 0);
        assert_eq!(kinds(&p), vec![EditKind::Match; 3]);
    }

    #[test]
    fn kitten_sitting() {
        let p = wagner_fischer("kitten", "sitting", &CostScheme::default());
        assert_eq!(p.total_cost, 3);
        p.validate(6, 7).unwrap();
        assert_eq!(p.cost_under(&CostScheme::default()), 3);
    }

    #[test]
    fn tie_break_prefers_diagonal_then_delete() {
        // "ab" vs "b": delete a + match b.
        let p = wagner_fischer("ab", "b", &CostScheme::default());
        assert_eq!(kinds(&p), vec![EditKind::Delete, EditKind::Match]);
        // "a" vs "b": substitute rather than delete+insert (cost 1 < 2).
        let p = wagner_fischer("a", "b", &CostScheme::default());
        assert_eq!(kinds(&p), vec![EditKind::Substitute]);
        // "ab" vs "ba": cost 2, two substitutions preferred over indels.
        let p = wagner_fischer("ab", "ba", &CostScheme::default());
        assert_eq!(kinds(&p), vec![EditKind::Substitute, EditKind::Substitute]);
    }

    #[test]
    fn newline_anchors() {
        let costs = CostScheme::default();
        let p = wagner_fischer("a\nb", "axb", &costs);
        assert!(p
            .ops
            .iter()
            .all(|o| o.kind() != EditKind::Substitute || o.clean_pos() != Some(1)));
        assert_eq!(p.total_cost, 2);
        let free = CostScheme {
            anchor_newlines: false,
            ..costs
        };
        assert_eq!(wagner_fischer("a\nb", "axb", &free).total_cost, 1);
    }

    #[test]
    fn offsets_are_applied() {
        let a: Vec<char> = "xy".chars().collect();
        let p = align_chars(&a, &a, &CostScheme::default(), 10, 20);
        assert_eq!(p.ops[1], EditOp::Match { clean: 11, noisy: 21 });
    }
}
