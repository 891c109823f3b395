//! The 29-token vocabulary and instance <-> token layout.
//!
//! Layout: prompt `BOS x SEP y SEP z`, target `z' EOS`. A Caesar key rides
//! along as a sidecar integer, or, with [`KeyEncoding::Unary`], as a third
//! `SEP` followed by `key` copies of [`UNARY_KEY_LETTER`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::taskgen::InstructionInstance;
use crate::word::{Symbol, Word, LETTERS};

pub type TokenId = u32;

pub const VOCAB_SIZE: usize = 29;
pub const SEP: TokenId = 26;
pub const BOS: TokenId = 27;
pub const EOS: TokenId = 28;
pub const UNARY_KEY_LETTER: char = 'k';

/// Frozen id map: `a`..`z` are 0..25, then separator, begin and end.
pub struct Vocabulary;

impl Vocabulary {
    pub fn len() -> usize {
        VOCAB_SIZE
    }

    pub fn token_str(id: TokenId) -> Option<String> {
        match id {
            0..=25 => Some(((b'a' + id as u8) as char).to_string()),
            SEP => Some("<sep>".into()),
            BOS => Some("<bos>".into()),
            EOS => Some("<eos>".into()),
            _ => None,
        }
    }

    pub fn id_of(token: &str) -> Option<TokenId> {
        match token {
            "<sep>" => Some(SEP),
            "<bos>" => Some(BOS),
            "<eos>" => Some(EOS),
            _ => {
                let mut cs = token.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Symbol::letter(c).map(|s| s.0 as TokenId),
                    _ => None,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeyEncoding {
    #[default]
    Sidecar,
    Unary,
}

impl KeyEncoding {
    pub fn as_str(self) -> &'static str {
        match self {
            KeyEncoding::Sidecar => "sidecar",
            KeyEncoding::Unary => "unary",
        }
    }
}

impl fmt::Display for KeyEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KeyEncoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sidecar" => Ok(KeyEncoding::Sidecar),
            "unary" => Ok(KeyEncoding::Unary),
            other => Err(format!("unknown key encoding `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInstance {
    pub prompt_ids: Vec<TokenId>,
    pub target_ids: Vec<TokenId>,
    pub key: Option<u8>,
}

/// The four words recovered from an encoding, plus the key if present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub lhs: Word,
    pub rhs: Word,
    pub input: Word,
    pub output: Word,
    pub key: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("symbol id {0} is outside a-z")]
    OutOfAlphabet(u8),
    #[error("Caesar key {0} outside 0..=25")]
    BadKey(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("prompt does not start with BOS")]
    MissingBos,
    #[error("target does not end with EOS")]
    MissingEos,
    #[error("token id {0} is outside the 29-token vocabulary")]
    IdOutOfRange(TokenId),
    #[error("prompt has {found} SEP tokens, expected {expected}")]
    SepCount { found: usize, expected: String },
    #[error("unexpected {0} token inside a word")]
    StrayControl(&'static str),
    #[error("unary key segment is malformed")]
    BadKeySegment,
}

fn push_word(out: &mut Vec<TokenId>, word: &Word) -> Result<(), EncodeError> {
    for s in word.symbols() {
        if !s.is_letter() {
            return Err(EncodeError::OutOfAlphabet(s.0));
        }
        out.push(s.0 as TokenId);
    }
    Ok(())
}

pub fn encode(inst: &InstructionInstance) -> Result<EncodedInstance, EncodeError> {
    encode_with(inst, KeyEncoding::Sidecar)
}

pub fn encode_with(inst: &InstructionInstance, keys: KeyEncoding) -> Result<EncodedInstance, EncodeError> {
    let mut prompt = Vec::with_capacity(inst.rule.lhs.len() + inst.rule.rhs.len() + inst.input.len() + 3);
    prompt.push(BOS);
    push_word(&mut prompt, &inst.rule.lhs)?;
    prompt.push(SEP);
    push_word(&mut prompt, &inst.rule.rhs)?;
    prompt.push(SEP);
    push_word(&mut prompt, &inst.input)?;
    let key = inst.meta.caesar_key;
    if let Some(k) = key {
        if k >= LETTERS {
            return Err(EncodeError::BadKey(k));
        }
        if keys == KeyEncoding::Unary {
            prompt.push(SEP);
            let letter = Symbol::letter(UNARY_KEY_LETTER).unwrap().0 as TokenId;
            prompt.extend(std::iter::repeat_n(letter, k as usize));
        }
    }
    let mut target = Vec::with_capacity(inst.expected.len() + 1);
    push_word(&mut target, &inst.expected)?;
    target.push(EOS);
    Ok(EncodedInstance {
        prompt_ids: prompt,
        target_ids: target,
        key,
    })
}

fn letters(ids: &[TokenId]) -> Result<Word, DecodeError> {
    ids.iter()
        .map(|&id| match id {
            0..=25 => Ok(Symbol(id as u8)),
            SEP => Err(DecodeError::StrayControl("SEP")),
            BOS => Err(DecodeError::StrayControl("BOS")),
            EOS => Err(DecodeError::StrayControl("EOS")),
            other => Err(DecodeError::IdOutOfRange(other)),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Word::new)
}

pub fn decode(enc: &EncodedInstance) -> Result<Decoded, DecodeError> {
    decode_with(enc, KeyEncoding::Sidecar)
}

pub fn decode_with(enc: &EncodedInstance, keys: KeyEncoding) -> Result<Decoded, DecodeError> {
    if let Some(&bad) = enc.prompt_ids.iter().chain(&enc.target_ids).find(|&&id| id as usize >= VOCAB_SIZE) {
        return Err(DecodeError::IdOutOfRange(bad));
    }
    let body = match enc.prompt_ids.split_first() {
        Some((&BOS, rest)) => rest,
        _ => return Err(DecodeError::MissingBos),
    };
    let answer = match enc.target_ids.split_last() {
        Some((&EOS, rest)) => rest,
        _ => return Err(DecodeError::MissingEos),
    };
    let parts: Vec<&[TokenId]> = body.split(|&t| t == SEP).collect();
    let seps = parts.len() - 1;
    let allowed: &[usize] = match keys {
        KeyEncoding::Sidecar => &[2],
        KeyEncoding::Unary => &[2, 3],
    };
    if !allowed.contains(&seps) {
        return Err(DecodeError::SepCount {
            found: seps,
            expected: allowed.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" or "),
        });
    }
    let key = if seps == 3 {
        let letter = Symbol::letter(UNARY_KEY_LETTER).unwrap().0 as TokenId;
        let seg = parts[3];
        if seg.iter().any(|&t| t != letter) || seg.len() >= LETTERS as usize {
            return Err(DecodeError::BadKeySegment);
        }
        Some(seg.len() as u8)
    } else if keys == KeyEncoding::Sidecar {
        enc.key
    } else {
        None
    };
    Ok(Decoded {
        lhs: letters(parts[0])?,
        rhs: letters(parts[1])?,
        input: letters(parts[2])?,
        output: letters(answer)?,
        key,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::RewriteRule;
    use crate::taskgen::{Category, Meta};
    use crate::word::w;
    use std::sync::Arc;

    fn inst(l: &str, r: &str, z: &str, out: &str, key: Option<u8>) -> InstructionInstance {
        InstructionInstance {
            rule: Arc::new(RewriteRule::new(w(l), w(r))),
            input: w(z),
            expected: w(out),
            category: Category::Op,
            meta: Meta {
                caesar_key: key,
                ..Meta::default()
            },
        }
    }

    fn ids(s: &str) -> Vec<TokenId> {
        s.bytes().map(|b| (b - b'a') as TokenId).collect()
    }

    #[test]
    fn frozen_id_map() {
        assert_eq!(Vocabulary::len(), 29);
        for (i, c) in ('a'..='z').enumerate() {
            assert_eq!(Vocabulary::id_of(&c.to_string()), Some(i as TokenId));
            assert_eq!(Vocabulary::token_str(i as TokenId), Some(c.to_string()));
        }
        assert_eq!((Vocabulary::id_of("<sep>"), Vocabulary::id_of("<bos>"), Vocabulary::id_of("<eos>")), (Some(26), Some(27), Some(28)));
        assert_eq!(Vocabulary::token_str(29), None);
    }

    #[test]
    fn worked_example_layout() {
        let enc = encode(&inst("iss", "art", "mississipi", "martissipi", None)).unwrap();
        let mut prompt = vec![BOS];
        prompt.extend(ids("iss"));
        prompt.push(SEP);
        prompt.extend(ids("art"));
        prompt.push(SEP);
        prompt.extend(ids("mississipi"));
        assert_eq!(enc.prompt_ids, prompt);
        let mut target = ids("martissipi");
        target.push(EOS);
        assert_eq!(enc.target_ids, target);

        let d = decode(&enc).unwrap();
        assert_eq!((d.lhs, d.rhs, d.input, d.output), (w("iss"), w("art"), w("mississipi"), w("martissipi")));
    }

    #[test]
    fn empty_rhs_leaves_adjacent_seps() {
        let enc = encode(&inst("ab", "", "xaby", "xy", None)).unwrap();
        assert_eq!(&enc.prompt_ids[3..5], &[SEP, SEP]);
        assert_eq!(decode(&enc).unwrap().rhs, Word::empty());
    }

    #[test]
    fn malformed_encodings() {
        let good = encode(&inst("ab", "c", "ab", "c", None)).unwrap();

        let mut e = good.clone();
        e.prompt_ids.push(SEP);
        assert!(matches!(decode(&e), Err(DecodeError::SepCount { found: 3, .. })));

        let mut e = good.clone();
        e.target_ids.insert(0, 29);
        assert_eq!(decode(&e), Err(DecodeError::IdOutOfRange(29)));

        let mut e = good.clone();
        e.prompt_ids.remove(0);
        assert_eq!(decode(&e), Err(DecodeError::MissingBos));

        let mut e = good;
        e.target_ids.pop();
        assert_eq!(decode(&e), Err(DecodeError::MissingEos));
    }

    #[test]
    fn unary_keys() {
        let i = inst("ab", "cd", "xabx", "xdex", Some(3));
        let enc = encode_with(&i, KeyEncoding::Unary).unwrap();
        assert_eq!(enc.prompt_ids.iter().filter(|&&t| t == SEP).count(), 3);
        assert_eq!(&enc.prompt_ids[enc.prompt_ids.len() - 3..], &[10, 10, 10]);
        let mut stripped = enc.clone();
        stripped.key = None;
        assert_eq!(decode_with(&stripped, KeyEncoding::Unary).unwrap().key, Some(3));

        let side = encode(&i).unwrap();
        assert_eq!(side.key, Some(3));
        assert_eq!(decode(&side).unwrap().key, Some(3));
        assert!(decode(&enc).is_err());
    }
}
