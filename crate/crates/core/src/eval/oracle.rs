//! Reference answers computed on plain byte strings.
//!
//! Nothing here touches the matcher in [`crate::rewrite`] or the generators
//! in [`crate::taskgen`]; it is the independent side used to certify them.

use crate::taskgen::{Family, InstructionInstance};
use crate::word::Word;

/// First index where `needle` occurs in `hay`, by trying every offset.
pub fn naive_find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.is_empty() {
        return Some(0);
    }
    if needle.len() > hay.len() {
        return None;
    }
    'outer: for i in 0..=hay.len() - needle.len() {
        for j in 0..needle.len() {
            if hay[i + j] != needle[j] {
                continue 'outer;
            }
        }
        return Some(i);
    }
    None
}

/// Disjoint left-to-right occurrence count.
pub fn naive_count(hay: &[u8], needle: &[u8]) -> usize {
    assert!(!needle.is_empty());
    let mut n = 0;
    let mut from = 0;
    while let Some(i) = naive_find(&hay[from..], needle) {
        n += 1;
        from += i + needle.len();
    }
    n
}

pub fn caesar_shift(text: &[u8], key: u8) -> Vec<u8> {
    text.iter().map(|&c| b'a' + (c - b'a' + key) % 26).collect()
}

/// Leftmost one-shot replacement on strings; `None` when `lhs` is absent.
pub fn naive_rewrite(input: &str, lhs: &str, rhs: &str) -> Option<String> {
    let at = naive_find(input.as_bytes(), lhs.as_bytes())?;
    let mut out = String::with_capacity(input.len() + rhs.len());
    out.push_str(&input[..at]);
    out.push_str(rhs);
    out.push_str(&input[at + lhs.len()..]);
    Some(out)
}

/// The label an instance should carry, recomputed from its rule, input and
/// Caesar key.
pub fn oracle_answer(inst: &InstructionInstance) -> Word {
    let input = inst.input.to_string();
    let lhs = inst.rule.lhs.to_string();
    let rhs = match inst.meta.caesar_key {
        Some(key) => String::from_utf8(caesar_shift(inst.rule.rhs.to_string().as_bytes(), key)).unwrap(),
        None => inst.rule.rhs.to_string(),
    };
    let answer = naive_rewrite(&input, &lhs, &rhs).unwrap_or(input);
    answer.parse().expect("oracle output stays within a-z")
}

/// Brute-force structural check that `word` is a `family` pattern with
/// parameter `k`.
pub fn family_member(word: &[u8], family: Family, k: u32) -> bool {
    let k = k as usize;
    if k == 0 || word.is_empty() || !word.len().is_multiple_of(k) {
        return false;
    }
    let block = word.len() / k;
    match family {
        Family::Repeated => word.chunks(k).all(|run| run.iter().all(|&c| c == run[0])),
        Family::Periodic => (0..word.len()).all(|i| word[i] == word[i % block]),
        Family::Mirror => {
            let base = &word[..block];
            word.chunks(block).enumerate().all(|(j, chunk)| {
                if j % 2 == 0 {
                    chunk == base
                } else {
                    chunk.iter().eq(base.iter().rev())
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::RewriteRule;
    use crate::taskgen::{Category, Meta};
    use crate::word::w;
    use std::sync::Arc;

    fn inst(l: &str, r: &str, z: &str, key: Option<u8>) -> InstructionInstance {
        InstructionInstance {
            rule: Arc::new(RewriteRule::new(w(l), w(r))),
            input: w(z),
            expected: Word::empty(),
            category: Category::Op,
            meta: Meta {
                caesar_key: key,
                ..Meta::default()
            },
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(oracle_answer(&inst("iss", "art", "mississipi", None)), w("martissipi"));
        assert_eq!(oracle_answer(&inst("iss", "art", "canada", None)), w("canada"));
        assert_eq!(oracle_answer(&inst("ab", "cd", "xabx", Some(1))), w("xdex"));
    }

    #[test]
    fn naive_counting() {
        assert_eq!(naive_count(b"aaa", b"aa"), 1);
        assert_eq!(naive_count(b"abab", b"ab"), 2);
        assert_eq!(naive_count(b"canada", b"iss"), 0);
        assert_eq!(naive_find(b"ab", b"abc"), None);
    }

    #[test]
    fn family_verifier() {
        assert!(family_member(b"aaabbbccc", Family::Repeated, 3));
        assert!(!family_member(b"aaabbbccc", Family::Periodic, 3));
        assert!(family_member(b"abcabc", Family::Periodic, 2));
        assert!(family_member(b"abccbaabc", Family::Mirror, 3));
        assert!(!family_member(b"abcabcabc", Family::Mirror, 3));
        assert!(!family_member(b"abcd", Family::Repeated, 3));
        assert!(family_member(b"xyz", Family::Mirror, 1));
    }
}
