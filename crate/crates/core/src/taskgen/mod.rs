//! Deterministic generation of rewrite-instruction datasets.
//!
//! Everything here is driven by explicit RNG handles; the same seed gives
//! the same rules, inputs and labels.

mod caesar;
mod dataset;
mod families;
mod power_law;
mod spec;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rewrite::{apply_rule_once, count_occurrences, RewriteRule};
use crate::word::{Symbol, Word, LETTERS};

pub use caesar::{caesar_encrypt, encrypted_answer, make_encrypted_instance};
pub use dataset::{build_dataset, build_dataset_sharded, census_of, Dataset};
pub use families::{build_constrained_pattern, sample_constrained_pattern, sample_semantic_rule, Family, SemanticRule};
pub use power_law::{allocate_power_law, PowerLawAllocation};
pub use spec::{DatasetSpec, KRange, SpecError, TaskKind, TrainSize, DEFAULT_SEED};

/// Filler resampling attempts per instance before giving up.
pub const MAX_FILL_RETRIES: usize = 100;

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("retry budget exhausted building an input for rule `{rule}`")]
    RetriesExhausted { rule: String },
    #[error("could only draw {got} of {needed} distinct {pool} rules")]
    CollisionBudget { pool: &'static str, needed: usize, got: usize },
    #[error("dictionary {path}: {reason}")]
    Dictionary { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Category {
    Op,
    NoOp,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Op => "op",
            Category::NoOp => "noop",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        match s {
            "op" => Some(Category::Op),
            "noop" => Some(Category::NoOp),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optional per-instance annotations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Meta {
    pub family: Option<Family>,
    pub k: Option<u32>,
    pub occurrences: Option<usize>,
    pub caesar_key: Option<u8>,
}

impl Meta {
    pub fn is_empty(&self) -> bool {
        *self == Meta::default()
    }
}

/// One (rule, input, expected output) example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionInstance {
    pub rule: Arc<RewriteRule>,
    pub input: Word,
    pub expected: Word,
    pub category: Category,
    pub meta: Meta,
}

/// Draws random rules with independently uniform side lengths.
#[derive(Debug, Clone, Copy)]
pub struct RuleSampler {
    pub max_lhs: usize,
    pub max_rhs: usize,
    /// Use exactly the maximum lengths instead of drawing them.
    pub fixed_len: bool,
    pub alphabet: u8,
}

impl RuleSampler {
    pub fn new(pattern_len: usize) -> Self {
        RuleSampler {
            max_lhs: pattern_len,
            max_rhs: pattern_len,
            fixed_len: false,
            alphabet: LETTERS,
        }
    }

    fn side<R: Rng + ?Sized>(&self, max: usize, rng: &mut R) -> Word {
        let len = if self.fixed_len { max } else { rng.random_range(1..=max) };
        random_word(len, self.alphabet, rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RewriteRule {
        assert!(self.max_lhs >= 1 && self.max_rhs >= 1, "pattern length must be positive");
        assert!(self.alphabet >= 2, "need at least two symbols to draw lhs != rhs");
        loop {
            let lhs = self.side(self.max_lhs, rng);
            let rhs = self.side(self.max_rhs, rng);
            if lhs != rhs {
                return RewriteRule::new(lhs, rhs);
            }
        }
    }
}

/// A random rule over `a`–`z` with side lengths uniform on `[1, pattern_len]`.
pub fn sample_rule<R: Rng + ?Sized>(pattern_len: usize, rng: &mut R) -> RewriteRule {
    RuleSampler::new(pattern_len).sample(rng)
}

pub(crate) fn random_word<R: Rng + ?Sized>(len: usize, alphabet: u8, rng: &mut R) -> Word {
    Word::new((0..len).map(|_| Symbol(rng.random_range(0..alphabet))).collect())
}

/// Builds a length-`len` word holding `copies` disjoint copies of `pattern`
/// at random slots. Filler symbols never complete an occurrence of
/// `pattern` ending at the filler position; occurrences straddling into a
/// copy are still possible, so callers verify the count.
fn place_and_fill<R: Rng + ?Sized>(pattern: &[Symbol], copies: usize, len: usize, rng: &mut R) -> Vec<Symbol> {
    let m = pattern.len();
    let free = len - copies * m;
    let mut slots = rand::seq::index::sample(rng, free + copies, copies).into_vec();
    slots.sort_unstable();
    let starts: Vec<usize> = slots.iter().enumerate().map(|(j, &s)| s - j + j * m).collect();

    let mut out = Vec::with_capacity(len);
    let mut next_copy = 0;
    while out.len() < len {
        if next_copy < starts.len() && out.len() == starts[next_copy] {
            out.extend_from_slice(pattern);
            next_copy += 1;
            continue;
        }
        let closes_match = m >= 1 && out.len() + 1 >= m && out[out.len() + 1 - m..] == pattern[..m - 1];
        let sym = if closes_match {
            // skip the one symbol that would finish the pattern here
            let banned = pattern[m - 1].0;
            let pick = rng.random_range(0..LETTERS - 1);
            Symbol(if pick >= banned { pick + 1 } else { pick })
        } else {
            Symbol(rng.random_range(0..LETTERS))
        };
        out.push(sym);
    }
    out
}

fn input_with_count<R: Rng + ?Sized>(rule: &RewriteRule, len: usize, occurrences: usize, rng: &mut R) -> Result<Word, GenError> {
    if rule.lhs.is_empty() {
        return Err(GenError::InvalidParameter("rule lhs is empty".into()));
    }
    if occurrences * rule.lhs.len() > len {
        return Err(GenError::Infeasible(format!(
            "{occurrences} copies of a length-{} pattern do not fit in length {len}",
            rule.lhs.len()
        )));
    }
    for _ in 0..MAX_FILL_RETRIES {
        let input = Word::new(place_and_fill(rule.lhs.symbols(), occurrences, len, rng));
        if count_occurrences(&input, &rule.lhs).expect("lhs checked non-empty") == occurrences {
            return Ok(input);
        }
    }
    Err(GenError::RetriesExhausted { rule: rule.to_string() })
}

/// An input of length `len` containing exactly `occurrences` copies of the
/// rule's lhs, labelled with the leftmost replacement.
pub fn make_op_instance<R: Rng + ?Sized>(
    rule: Arc<RewriteRule>,
    len: usize,
    occurrences: usize,
    rng: &mut R,
) -> Result<InstructionInstance, GenError> {
    if occurrences == 0 {
        return Err(GenError::InvalidParameter("op instances need at least one occurrence".into()));
    }
    let input = input_with_count(&rule, len, occurrences, rng)?;
    let expected = apply_rule_once(&rule, &input).expect("lhs checked non-empty").result;
    Ok(InstructionInstance {
        rule,
        input,
        expected,
        category: Category::Op,
        meta: Meta {
            occurrences: Some(occurrences),
            ..Meta::default()
        },
    })
}

/// An input of length `len` that does not contain the rule's lhs; the
/// expected output is the input itself.
pub fn make_noop_instance<R: Rng + ?Sized>(
    rule: Arc<RewriteRule>,
    len: usize,
    rng: &mut R,
) -> Result<InstructionInstance, GenError> {
    let input = if rule.lhs.len() > len {
        let w = random_word(len, LETTERS, rng);
        debug_assert_eq!(count_occurrences(&w, &rule.lhs).ok(), Some(0));
        w
    } else {
        input_with_count(&rule, len, 0, rng)?
    };
    Ok(InstructionInstance {
        expected: input.clone(),
        rule,
        input,
        category: Category::NoOp,
        meta: Meta::default(),
    })
}
