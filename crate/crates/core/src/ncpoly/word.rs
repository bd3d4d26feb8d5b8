use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable index. Index 0 is the free-evolution letter V by convention.
pub type Letter = u16;

/// A monomial in matrix-product order: `letters[0]` is the leftmost factor,
/// so the chronologically first propagator is the last letter.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Self(vec![l])
    }

    pub fn power(l: Letter, k: usize) -> Self {
        Self(vec![l; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn ends_with(&self, letter: Letter, count: usize) -> bool {
        self.len() >= count && self.0[self.len() - count..].iter().all(|&l| l == letter)
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    /// Tokenizes `s` against `names` by longest match, e.g. "VWWVW" with
    /// names ["V","W"], or "XY1XY2" with ["X","Y1","Y2"].
    pub fn parse(s: &str, names: &[String]) -> Result<Word> {
        let mut letters = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let hit = names
                .iter()
                .enumerate()
                .filter(|(_, n)| !n.is_empty() && rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            let Some((i, n)) = hit else {
                return Err(Error::Invalid(format!("cannot tokenize {rest:?} with names {names:?}")));
            };
            letters.push(i as Letter);
            rest = &rest[n.len()..];
        }
        Ok(Word(letters))
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.is_empty() {
            return "1".into();
        }
        let single = names.iter().all(|n| n.chars().count() == 1);
        let parts: Vec<&str> = self.0.iter().map(|&l| names[l as usize].as_str()).collect();
        if single {
            parts.concat()
        } else {
            parts.join("·")
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_longest_match() {
        let n = names(&["X", "Y1", "Y2"]);
        assert_eq!(Word::parse("XY1XY2", &n).unwrap(), Word(vec![0, 1, 0, 2]));
        assert!(Word::parse("XZ", &n).is_err());
    }

    #[test]
    fn suffix_and_display() {
        let n = names(&["V", "W"]);
        let w = Word::parse("VWVV", &n).unwrap();
        assert!(w.ends_with(0, 2));
        assert!(!w.ends_with(0, 3));
        assert_eq!(w.display(&n), "VWVV");
        assert_eq!(w.reversed().display(&n), "VVWV");
    }
}
