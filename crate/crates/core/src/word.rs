//! Symbols and words over the lowercase letter alphabet.
//!
//! A [`Symbol`] is a small integer id. Ids `0..26` name the letters `a`–`z`;
//! Markov programs may declare further work symbols above that range and
//! give them their own names (see [`crate::markov::Alphabet`]).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Number of letters in the base alphabet.
pub const LETTERS: u8 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn letter(c: char) -> Option<Symbol> {
        c.is_ascii_lowercase().then(|| Symbol(c as u8 - b'a'))
    }

    pub fn is_letter(self) -> bool {
        self.0 < LETTERS
    }

    /// The letter this symbol names, if it is one of `a`–`z`.
    pub fn as_letter(self) -> Option<char> {
        self.is_letter().then(|| (b'a' + self.0) as char)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{ch}` at offset {offset} is not a lowercase letter")]
pub struct WordError {
    pub ch: char,
    pub offset: usize,
}

/// An ordered, possibly empty sequence of symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every symbol is one of `a`–`z`.
    pub fn is_lettered(&self) -> bool {
        self.0.iter().all(|s| s.is_letter())
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl AsRef<[Symbol]> for Word {
    fn as_ref(&self) -> &[Symbol] {
        &self.0
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, ch)| Symbol::letter(ch).ok_or(WordError { ch, offset }))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// Letters print as themselves; ids beyond the letter range print as `<id>`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            match s.as_letter() {
                Some(c) => write!(f, "{c}")?,
                None => write!(f, "<{}>", s.0)?,
            }
        }
        Ok(())
    }
}

/// Shorthand for building a letter word in tests and fixtures.
///
/// Panics on anything outside `a`–`z`.
pub fn w(s: &str) -> Word {
    s.parse().expect("fixture word must be lowercase letters")
}
