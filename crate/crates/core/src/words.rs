//! Free-group words over a fixed basis: parsing, free and cyclic reduction,
//! and maximal-root (proper power) decomposition.
//!
//! Letters are written `a..z` for generators and `A..Z` for their inverses,
//! so the ambient rank is at most 26.

use crate::error::{Error, Result};
use std::fmt;

/// A basis letter with a sign: `index` in `1..=rank`, `sign` in `{+1, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: u32,
    pub sign: i8,
}

impl Letter {
    pub fn new(index: u32, sign: i8) -> Self {
        debug_assert!(index >= 1 && (sign == 1 || sign == -1));
        Letter { index, sign }
    }

    pub fn inverse(self) -> Self {
        Letter { index: self.index, sign: -self.sign }
    }

    fn to_char(self) -> char {
        let base = if self.sign > 0 { b'a' } else { b'A' };
        (base + (self.index - 1) as u8) as char
    }
}

/// A freely reduced word; the empty sequence encodes the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    ambient_rank: u32,
}

/// Maximal-root decomposition `w = c · root^exponent · c⁻¹` with `root`
/// cyclically reduced and `exponent` maximal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerDecomposition {
    pub root: Word,
    pub exponent: u32,
    pub conjugator: Word,
}

impl Word {
    /// Builds a word from raw letters, freely reducing.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>, rank: u32) -> Result<Self> {
        if rank < 1 || rank > 26 {
            return Err(Error::Input(format!("rank {rank} outside 1..=26")));
        }
        let mut reduced: Vec<Letter> = Vec::new();
        for l in letters {
            if l.index < 1 || l.index > rank {
                return Err(Error::Input(format!(
                    "letter index {} outside rank {rank}",
                    l.index
                )));
            }
            if reduced.last() == Some(&l.inverse()) {
                reduced.pop();
            } else {
                reduced.push(l);
            }
        }
        Ok(Word { letters: reduced, ambient_rank: rank })
    }

    pub fn identity(rank: u32) -> Self {
        Word { letters: Vec::new(), ambient_rank: rank }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn ambient_rank(&self) -> u32 {
        self.ambient_rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            ambient_rank: self.ambient_rank,
        }
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let rank = self.ambient_rank.max(other.ambient_rank);
        Word::from_letters(
            self.letters.iter().chain(other.letters.iter()).copied(),
            rank,
        )
        .expect("letters already within rank")
    }

    pub fn pow(&self, k: u32) -> Word {
        let mut out = Word::identity(self.ambient_rank);
        for _ in 0..k {
            out = out.concat(self);
        }
        out
    }

    /// `(core, conjugator)` with `conjugator · core · conjugator⁻¹ = self`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut letters = self.letters.clone();
        let mut prefix: Vec<Letter> = Vec::new();
        while letters.len() >= 2 && *letters.first().unwrap() == letters.last().unwrap().inverse() {
            prefix.push(letters.remove(0));
            letters.pop();
        }
        (
            Word { letters, ambient_rank: self.ambient_rank },
            Word { letters: prefix, ambient_rank: self.ambient_rank },
        )
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => *f != l.inverse(),
            _ => true,
        }
    }

    /// Maximal root: the smallest cyclic word whose power is the cyclic core.
    pub fn power_decomposition(&self) -> Result<PowerDecomposition> {
        if self.is_empty() {
            return Err(Error::Domain("power decomposition of the empty word".into()));
        }
        let (core, conj) = self.cyclic_reduce();
        let n = core.len();
        // Smallest period p of the cyclic letter sequence with p | n.
        for p in 1..=n {
            if n % p != 0 {
                continue;
            }
            if (0..n).all(|i| core.letters[i] == core.letters[i % p]) {
                let root = Word {
                    letters: core.letters[..p].to_vec(),
                    ambient_rank: self.ambient_rank,
                };
                return Ok(PowerDecomposition {
                    root,
                    exponent: (n / p) as u32,
                    conjugator: conj,
                });
            }
        }
        unreachable!("period n always matches")
    }

    pub fn is_proper_power(&self) -> bool {
        !self.is_empty() && self.power_decomposition().unwrap().exponent > 1
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// Parses `a..z` / `A..Z` text into a freely reduced word.
pub fn parse_word(text: &str, rank: u32) -> Result<Word> {
    let mut letters = Vec::with_capacity(text.len());
    for c in text.chars() {
        let l = match c {
            'a'..='z' => Letter::new(c as u32 - 'a' as u32 + 1, 1),
            'A'..='Z' => Letter::new(c as u32 - 'A' as u32 + 1, -1),
            '1' if text.len() == 1 => return Word::from_letters([], rank),
            _ => return Err(Error::Parse(format!("illegal character {c:?} in word"))),
        };
        if l.index > rank {
            return Err(Error::Input(format!(
                "letter {c:?} outside rank {rank}"
            )));
        }
        letters.push(l);
    }
    Word::from_letters(letters, rank)
}

/// Parses a comma-separated multiset of words.
pub fn parse_words(text: &str, rank: u32) -> Result<Vec<Word>> {
    text.split(',')
        .map(|t| parse_word(t.trim(), rank))
        .collect()
}

/// Smallest rank that can host every letter of `text` (at least 1).
pub fn infer_rank(text: &str) -> u32 {
    text.chars()
        .filter_map(|c| match c {
            'a'..='z' => Some(c as u32 - 'a' as u32 + 1),
            'A'..='Z' => Some(c as u32 - 'A' as u32 + 1),
            _ => None,
        })
        .max()
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, r: u32) -> Word {
        parse_word(s, r).unwrap()
    }

    #[test]
    fn parse_and_reduce() {
        assert_eq!(w("abAB", 2).len(), 4);
        assert!(w("aA", 1).is_identity());
        assert!(w("abBA", 2).is_identity());
        assert_eq!(w("abB", 2).to_string(), "a");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_word("ab3", 2), Err(Error::Parse(_))));
        assert!(matches!(parse_word("abc", 2), Err(Error::Input(_))));
    }

    #[test]
    fn print_parse_roundtrip() {
        for s in ["abAB", "a", "bab", "aabb", "BAba"] {
            let word = w(s, 2);
            assert_eq!(parse_word(&word.to_string(), 2).unwrap(), word);
        }
    }

    #[test]
    fn cyclic_reduction() {
        let (core, conj) = w("abAB", 2).cyclic_reduce();
        assert_eq!(core, w("abAB", 2));
        assert!(conj.is_identity());

        let (core, conj) = w("baB", 2).cyclic_reduce();
        assert_eq!(core, w("a", 2));
        assert_eq!(conj, w("b", 2));
        assert_eq!(conj.concat(&core).concat(&conj.inverse()), w("baB", 2));

        let (core, conj) = Word::identity(2).cyclic_reduce();
        assert!(core.is_identity() && conj.is_identity());
    }

    #[test]
    fn power_decompositions() {
        let d = w("aa", 1).power_decomposition().unwrap();
        assert_eq!((d.root.to_string().as_str(), d.exponent), ("a", 2));

        let d = w("abab", 2).power_decomposition().unwrap();
        assert_eq!((d.root.to_string().as_str(), d.exponent), ("ab", 2));

        // abAB: no nontrivial rotation of the cyclic word fixes it.
        let c = w("abAB", 2);
        let n = c.len();
        for p in 1..n {
            if n % p == 0 {
                assert!((0..n).any(|i| c.letters()[i] != c.letters()[i % p]));
            }
        }
        let d = c.power_decomposition().unwrap();
        assert_eq!(d.exponent, 1);
        assert_eq!(d.root, c);

        assert!(w("", 2).power_decomposition().is_err());
    }

    #[test]
    fn power_of_power_is_multiple() {
        for base in ["a", "ab", "abAB", "ba"] {
            let u = w(base, 2);
            for k in 1..4u32 {
                let d = u.pow(k).power_decomposition().unwrap();
                assert_eq!(d.exponent % k, 0, "u={base} k={k}");
            }
        }
    }

    #[test]
    fn conjugated_power_recovers_input() {
        let word = w("b", 2).concat(&w("abab", 2)).concat(&w("B", 2));
        let d = word.power_decomposition().unwrap();
        let rebuilt = d
            .conjugator
            .concat(&d.root.pow(d.exponent))
            .concat(&d.conjugator.inverse());
        assert_eq!(rebuilt, word);
    }
}
