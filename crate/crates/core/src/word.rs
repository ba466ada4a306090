//! Digit words, pointed words and periodic tails.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest digit supported anywhere in the crate.
pub const MAX_ALPHABET: u8 = 9;

/// A finite word of continued-fraction digits (each `>= 1`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn new(digits: Vec<u8>) -> Self {
        Word(digits)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Whether `other` occurs as a contiguous subword.
    pub fn contains(&self, other: &Word) -> bool {
        if other.is_empty() {
            return true;
        }
        self.0.windows(other.len()).any(|w| w == other.0.as_slice())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut d = self.0.clone();
        d.extend_from_slice(&other.0);
        Word(d)
    }

    /// Error unless every digit lies in `1..=max`.
    pub fn check_alphabet(&self, max: u8) -> Result<()> {
        for &d in &self.0 {
            if d < 1 || d > max {
                return Err(Error::Digit { digit: d, max });
            }
        }
        Ok(())
    }

    pub fn max_digit(&self) -> u8 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;
    /// Digits written without separators (`"21212"`) or comma separated.
    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        let mut out = Vec::new();
        if s.contains(',') {
            for part in s.split(',') {
                let d: u8 = part
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad digit {part:?} in {s:?}")))?;
                out.push(d);
            }
        } else {
            for c in s.chars() {
                let d = c
                    .to_digit(10)
                    .ok_or_else(|| Error::Parse(format!("bad digit {c:?} in {s:?}")))?;
                out.push(d as u8);
            }
        }
        if out.iter().any(|&d| d == 0) {
            return Err(Error::Parse(format!("digit 0 in {s:?}")));
        }
        Ok(Word(out))
    }
}

impl From<&[u8]> for Word {
    fn from(d: &[u8]) -> Self {
        Word(d.to_vec())
    }
}

/// A word with a marked zero position, written `212*12` (the digit before
/// the asterisk is the zeroth digit).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointedWord {
    pub word: Word,
    pub zero_index: usize,
}

impl PointedWord {
    pub fn new(word: Word, zero_index: usize) -> Result<Self> {
        if zero_index >= word.len() {
            return Err(Error::Invalid(format!(
                "zero index {zero_index} outside word of length {}",
                word.len()
            )));
        }
        Ok(PointedWord { word, zero_index })
    }

    /// Digits strictly left of the zero position.
    pub fn k(&self) -> usize {
        self.zero_index
    }

    /// Digits strictly right of the zero position.
    pub fn j(&self) -> usize {
        self.word.len() - self.zero_index - 1
    }

    pub fn a0(&self) -> u8 {
        self.word.0[self.zero_index]
    }

    /// `a_{-1}, a_{-2}, ...` (reading leftwards).
    pub fn left_outward(&self) -> Vec<u8> {
        self.word.0[..self.zero_index].iter().rev().copied().collect()
    }

    /// `a_1, a_2, ...`.
    pub fn right(&self) -> &[u8] {
        &self.word.0[self.zero_index + 1..]
    }

    /// Reverse the word, keeping the same digit marked.
    pub fn reversed(&self) -> PointedWord {
        PointedWord {
            word: self.word.reversed(),
            zero_index: self.word.len() - 1 - self.zero_index,
        }
    }

    pub fn push_right(&self, d: u8) -> PointedWord {
        let mut w = self.word.0.clone();
        w.push(d);
        PointedWord {
            word: Word(w),
            zero_index: self.zero_index,
        }
    }

    pub fn push_left(&self, d: u8) -> PointedWord {
        let mut w = vec![d];
        w.extend_from_slice(&self.word.0);
        PointedWord {
            word: Word(w),
            zero_index: self.zero_index + 1,
        }
    }

    /// Wrap with digits on both sides: `prefix · self · suffix`.
    pub fn wrap(&self, prefix: &Word, suffix: &Word) -> PointedWord {
        PointedWord {
            word: prefix.concat(&self.word).concat(suffix),
            zero_index: self.zero_index + prefix.len(),
        }
    }
}

impl fmt::Display for PointedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.word.0.iter().enumerate() {
            write!(f, "{d}")?;
            if i == self.zero_index {
                write!(f, "*")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PointedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointedWord({self})")
    }
}

impl FromStr for PointedWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<PointedWord> {
        let s = s.trim();
        let star = s
            .find('*')
            .ok_or_else(|| Error::Parse(format!("pointed word {s:?} lacks '*'")))?;
        if s[star + 1..].contains('*') {
            return Err(Error::Parse(format!("more than one '*' in {s:?}")));
        }
        if star == 0 {
            return Err(Error::Parse(format!("'*' must follow a digit in {s:?}")));
        }
        let left: Word = s[..star].parse()?;
        let right: Word = if star + 1 < s.len() {
            s[star + 1..].parse()?
        } else {
            Word::empty()
        };
        PointedWord::new(left.concat(&right), left.len() - 1)
    }
}

/// An eventually periodic digit sequence `preperiod · period · period · ...`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TailSpec {
    pub preperiod: Word,
    pub period: Word,
}

impl TailSpec {
    pub fn new(preperiod: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Invalid("empty period".into()));
        }
        Ok(TailSpec { preperiod, period })
    }

    pub fn periodic(period: &[u8]) -> Self {
        TailSpec {
            preperiod: Word::empty(),
            period: Word(period.to_vec()),
        }
    }

    /// The alternating tail `1 2 1 2 ...`.
    pub fn one_two() -> Self {
        Self::periodic(&[1, 2])
    }

    /// The alternating tail `2 1 2 1 ...`.
    pub fn two_one() -> Self {
        Self::periodic(&[2, 1])
    }

    /// Prepend digits in front of the tail.
    pub fn behind(prefix: &[u8], tail: &TailSpec) -> TailSpec {
        let mut pre = prefix.to_vec();
        pre.extend_from_slice(&tail.preperiod.0);
        TailSpec {
            preperiod: Word(pre),
            period: tail.period.clone(),
        }
    }
}
