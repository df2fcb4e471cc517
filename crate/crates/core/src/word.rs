//! Exponent words over `{1, *}` indexing *-moments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Exponent {
    One,
    Star,
}

impl Exponent {
    /// `+1` for `1` and `-1` for `*`.
    pub fn sign(self) -> i64 {
        match self {
            Exponent::One => 1,
            Exponent::Star => -1,
        }
    }
}

/// A word `e = (e_1, …, e_p)` with letters in `{1, *}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ExponentWord(Vec<Exponent>);

impl ExponentWord {
    pub fn new(letters: Vec<Exponent>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// The plain word `(1, …, 1)` of length `p`.
    pub fn plain(p: usize) -> Self {
        Self(vec![Exponent::One; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Exponent] {
        &self.0
    }

    pub fn is_plain(&self) -> bool {
        self.0.iter().all(|&e| e == Exponent::One)
    }

    /// All `2^p` words of length `p`, in lexicographic order with `1 < *`.
    pub fn all_of_length(p: usize) -> Vec<Self> {
        (0..1usize << p)
            .map(|bits| {
                Self((0..p).map(|x| if bits >> (p - 1 - x) & 1 == 1 { Exponent::Star } else { Exponent::One }).collect())
            })
            .collect()
    }

    /// All words of length `0..=p_max`, shorter words first.
    pub fn all_up_to(p_max: usize) -> Vec<Self> {
        (0..=p_max).flat_map(Self::all_of_length).collect()
    }

    /// The letters at the given positions, in that order.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        Self(positions.iter().map(|&x| self.0[x]).collect())
    }
}

impl fmt::Display for ExponentWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for e in &self.0 {
            f.write_str(match e {
                Exponent::One => "1",
                Exponent::Star => "*",
            })?;
        }
        Ok(())
    }
}

impl FromStr for ExponentWord {
    type Err = Error;

    /// Parse a string over `{1, *}`; `-` or the empty string is the empty word.
    /// Commas and spaces between letters are ignored.
    fn from_str(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed == "-" {
            return Ok(Self::empty());
        }
        trimmed
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
            .map(|c| match c {
                '1' => Ok(Exponent::One),
                '*' => Ok(Exponent::Star),
                other => Err(Error::Invalid(format!("exponent word {text:?} contains {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl From<ExponentWord> for String {
    fn from(word: ExponentWord) -> Self {
        word.to_string()
    }
}

impl TryFrom<String> for ExponentWord {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        text.parse()
    }
}
