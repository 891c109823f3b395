//! Caesar-shifted replacement ("encrypted rewriting").

use std::sync::Arc;

use rand::Rng;

use super::{make_noop_instance, make_op_instance, Category, GenError, InstructionInstance};
use crate::rewrite::{apply_with_rhs, RewriteRule};
use crate::word::{Symbol, Word, LETTERS};

/// Shifts every letter of `y` by `key` modulo 26.
pub fn caesar_encrypt(y: &Word, key: u8) -> Result<Word, GenError> {
    if key >= LETTERS {
        return Err(GenError::InvalidParameter(format!("Caesar key {key} outside 0..=25")));
    }
    if !y.is_lettered() {
        return Err(GenError::InvalidParameter(format!("cannot encrypt non-letter word {y}")));
    }
    Ok(Word::new(y.symbols().iter().map(|s| Symbol((s.0 + key) % LETTERS)).collect()))
}

/// Splices `E(rhs, key)` over the leftmost `lhs` in `input`, or returns
/// `input` when `lhs` is absent.
pub fn encrypted_answer(rule: &RewriteRule, key: u8, input: &Word) -> Result<Word, GenError> {
    let shifted = caesar_encrypt(&rule.rhs, key)?;
    apply_with_rhs(rule, &shifted, input)
        .map(|o| o.result)
        .map_err(|e| GenError::InvalidParameter(e.to_string()))
}

pub fn make_encrypted_instance<R: Rng + ?Sized>(
    rule: Arc<RewriteRule>,
    key: u8,
    len: usize,
    category: Category,
    rng: &mut R,
) -> Result<InstructionInstance, GenError> {
    if key >= LETTERS {
        return Err(GenError::InvalidParameter(format!("Caesar key {key} outside 0..=25")));
    }
    let mut inst = match category {
        Category::Op => {
            let mut inst = make_op_instance(rule, len, 1, rng)?;
            inst.expected = encrypted_answer(&inst.rule, key, &inst.input)?;
            inst
        }
        Category::NoOp => make_noop_instance(rule, len, rng)?,
    };
    inst.meta.caesar_key = Some(key);
    Ok(inst)
}
