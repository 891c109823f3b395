//! Structurally constrained rule patterns.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use super::{random_word, GenError, KRange};
use crate::rewrite::RewriteRule;
use crate::word::{Word, LETTERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Each symbol of the base word repeated `k` times: `aaabbbccc`.
    Repeated,
    /// The base word repeated `k` times: `abcabc`.
    Periodic,
    /// `k` blocks alternating the base word and its reverse: `abccbaabc`.
    Mirror,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Repeated, Family::Periodic, Family::Mirror];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Repeated => "repeated",
            Family::Periodic => "periodic",
            Family::Mirror => "mirror",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repeated" => Ok(Family::Repeated),
            "periodic" => Ok(Family::Periodic),
            "mirror" => Ok(Family::Mirror),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

pub fn build_constrained_pattern(family: Family, k: u32, base: &Word) -> Word {
    let k = k as usize;
    let u = base.symbols();
    let mut out = Vec::with_capacity(k * u.len());
    match family {
        Family::Repeated => {
            for &s in u {
                out.extend(std::iter::repeat_n(s, k));
            }
        }
        Family::Periodic => {
            for _ in 0..k {
                out.extend_from_slice(u);
            }
        }
        Family::Mirror => {
            for block in 0..k {
                if block % 2 == 0 {
                    out.extend_from_slice(u);
                } else {
                    out.extend(u.iter().rev());
                }
            }
        }
    }
    Word::new(out)
}

/// A random member of `family` with parameter `k` and length `len`.
pub fn sample_constrained_pattern<R: Rng + ?Sized>(family: Family, k: u32, len: usize, rng: &mut R) -> Result<Word, GenError> {
    if k == 0 {
        return Err(GenError::InvalidParameter("k must be at least 1".into()));
    }
    if len == 0 || !len.is_multiple_of(k as usize) {
        return Err(GenError::InvalidParameter(format!(
            "length {len} is not a positive multiple of k={k}"
        )));
    }
    let base = random_word(len / k as usize, LETTERS, rng);
    Ok(build_constrained_pattern(family, k, &base))
}

/// A rule whose two sides belong to the same family with the same `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticRule {
    pub rule: RewriteRule,
    pub family: Family,
    pub k: u32,
}

/// Picks a family and `k` uniformly, then both sides with base-word lengths
/// uniform on `[1, pattern_len / k]`.
pub fn sample_semantic_rule<R: Rng + ?Sized>(
    families: &[Family],
    k_range: KRange,
    pattern_len: usize,
    rng: &mut R,
) -> Result<SemanticRule, GenError> {
    if families.is_empty() {
        return Err(GenError::InvalidParameter("no semantic families given".into()));
    }
    if k_range.lo == 0 || k_range.lo > k_range.hi {
        return Err(GenError::InvalidParameter(format!("empty or zero k range {k_range}")));
    }
    let family = families[rng.random_range(0..families.len())];
    let k = rng.random_range(k_range.lo..=k_range.hi);
    let max_base = pattern_len / k as usize;
    if max_base == 0 {
        return Err(GenError::Infeasible(format!("pattern length {pattern_len} is shorter than k={k}")));
    }
    loop {
        let lhs_len = rng.random_range(1..=max_base) * k as usize;
        let rhs_len = rng.random_range(1..=max_base) * k as usize;
        let lhs = sample_constrained_pattern(family, k, lhs_len, rng)?;
        let rhs = sample_constrained_pattern(family, k, rhs_len, rng)?;
        if lhs != rhs {
            return Ok(SemanticRule {
                rule: RewriteRule::new(lhs, rhs),
                family,
                k,
            });
        }
    }
}
