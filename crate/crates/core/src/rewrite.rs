//! Single-rule rewriting: leftmost matching, one-shot replacement and
//! non-overlapping occurrence counting.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::word::{Symbol, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("rule pattern (left-hand side) is empty")]
    EmptyPattern,
}

/// A rewrite `lhs -> rhs`. Stop rules only occur inside Markov programs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewriteRule {
    pub lhs: Word,
    pub rhs: Word,
    pub is_stop: bool,
}

impl RewriteRule {
    pub fn new(lhs: Word, rhs: Word) -> Self {
        RewriteRule {
            lhs,
            rhs,
            is_stop: false,
        }
    }

    pub fn stop(lhs: Word, rhs: Word) -> Self {
        RewriteRule {
            lhs,
            rhs,
            is_stop: true,
        }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.is_stop { "->." } else { "->" };
        write!(f, "{} {arrow} {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OutcomeKind {
    Replaced,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteOutcome {
    pub kind: OutcomeKind,
    pub result: Word,
    /// Match start; present iff `kind == Replaced`.
    pub position: Option<usize>,
}

/// Knuth-Morris-Pratt failure table: `table[i]` is the length of the longest
/// proper border of `pattern[..=i]`.
fn failure_table(pattern: &[Symbol]) -> Vec<usize> {
    let mut table = vec![0; pattern.len()];
    let mut k = 0;
    for i in 1..pattern.len() {
        while k > 0 && pattern[i] != pattern[k] {
            k = table[k - 1];
        }
        if pattern[i] == pattern[k] {
            k += 1;
        }
        table[i] = k;
    }
    table
}

/// Streams match start positions. With `overlapping == false` the automaton
/// resets after each match, giving the greedy left-to-right disjoint scan.
fn scan(text: &[Symbol], pattern: &[Symbol], overlapping: bool, mut on_match: impl FnMut(usize) -> bool) {
    let table = failure_table(pattern);
    let m = pattern.len();
    let mut k = 0;
    for (i, &s) in text.iter().enumerate() {
        while k > 0 && s != pattern[k] {
            k = table[k - 1];
        }
        if s == pattern[k] {
            k += 1;
        }
        if k == m {
            if !on_match(i + 1 - m) {
                return;
            }
            k = if overlapping { table[m - 1] } else { 0 };
        }
    }
}

pub(crate) fn leftmost_in(text: &[Symbol], pattern: &[Symbol]) -> Option<usize> {
    if pattern.is_empty() {
        return Some(0);
    }
    let mut found = None;
    scan(text, pattern, true, |i| {
        found = Some(i);
        false
    });
    found
}

pub(crate) fn splice(text: &[Symbol], at: usize, cut: usize, insert: &[Symbol]) -> Word {
    let mut out = Vec::with_capacity(text.len() - cut + insert.len());
    out.extend_from_slice(&text[..at]);
    out.extend_from_slice(insert);
    out.extend_from_slice(&text[at + cut..]);
    Word::new(out)
}

/// Smallest index at which `x` occurs in `z`.
pub fn find_leftmost(z: &Word, x: &Word) -> Result<Option<usize>, PatternError> {
    if x.is_empty() {
        return Err(PatternError::EmptyPattern);
    }
    Ok(leftmost_in(z.symbols(), x.symbols()))
}

/// Replaces the leftmost occurrence of `rule.lhs` in `z`, once.
pub fn apply_rule_once(rule: &RewriteRule, z: &Word) -> Result<RewriteOutcome, PatternError> {
    apply_with_rhs(rule, &rule.rhs, z)
}

/// As [`apply_rule_once`] but splicing `rhs` instead of the rule's own
/// right-hand side (the encrypted task substitutes a shifted rhs).
pub fn apply_with_rhs(rule: &RewriteRule, rhs: &Word, z: &Word) -> Result<RewriteOutcome, PatternError> {
    Ok(match find_leftmost(z, &rule.lhs)? {
        Some(i) => RewriteOutcome {
            kind: OutcomeKind::Replaced,
            result: splice(z.symbols(), i, rule.lhs.len(), rhs.symbols()),
            position: Some(i),
        },
        None => RewriteOutcome {
            kind: OutcomeKind::Unchanged,
            result: z.clone(),
            position: None,
        },
    })
}

/// Number of occurrences of `x` in `z` under a greedy, non-overlapping,
/// left-to-right scan: `"aaa"` contains `"aa"` once.
pub fn count_occurrences(z: &Word, x: &Word) -> Result<usize, PatternError> {
    if x.is_empty() {
        return Err(PatternError::EmptyPattern);
    }
    let mut n = 0;
    scan(z.symbols(), x.symbols(), false, |_| {
        n += 1;
        true
    });
    Ok(n)
}
