use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::word::Word;

/// Largest alphabet the subshift code packs (two bits per digit).
pub const SUBSHIFT_MAX_ALPHABET: u8 = 4;

/// A normalized finite list of forbidden words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenSet {
    pub alphabet_max: u8,
    /// Sorted by length, then lexicographically.
    pub words: Vec<Word>,
    pub closed_under_reversal: bool,
}

impl ForbiddenSet {
    /// Normalize: optionally add reverses, drop duplicates and drop every
    /// word that contains another listed word.
    pub fn new(alphabet_max: u8, words: &[Word], include_reverses: bool) -> Result<Self> {
        if alphabet_max < 1 || alphabet_max > SUBSHIFT_MAX_ALPHABET {
            return Err(Error::Invalid(format!(
                "alphabet size {alphabet_max} outside 1..={SUBSHIFT_MAX_ALPHABET}"
            )));
        }
        let mut all = BTreeSet::new();
        for w in words {
            if w.is_empty() {
                return Err(Error::Invalid("empty forbidden word".into()));
            }
            w.check_alphabet(alphabet_max)?;
            all.insert(w.clone());
            if include_reverses {
                all.insert(w.reversed());
            }
        }
        let mut sorted: Vec<Word> = all.into_iter().collect();
        sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut kept: Vec<Word> = Vec::new();
        for w in sorted {
            if !kept.iter().any(|k| w.contains(k)) {
                kept.push(w);
            }
        }
        let set: BTreeSet<&Word> = kept.iter().collect();
        let reversed: Vec<Word> = kept.iter().map(|w| w.reversed()).collect();
        let closed = reversed.iter().all(|r| set.contains(r));
        Ok(ForbiddenSet {
            alphabet_max,
            words: kept,
            closed_under_reversal: closed,
        })
    }

    pub fn empty(alphabet_max: u8) -> Result<Self> {
        Self::new(alphabet_max, &[], false)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    /// The default block length `max |f| − 1` (at least 1).
    pub fn default_n(&self) -> usize {
        self.max_len().saturating_sub(1).max(1)
    }

    /// Whether `w` contains some forbidden word.
    pub fn forbids(&self, w: &Word) -> bool {
        self.words.iter().any(|f| w.contains(f))
    }

    /// Number of distinct nonempty proper suffixes of forbidden words.
    pub fn distinct_suffixes(&self) -> usize {
        let mut s = BTreeSet::new();
        for w in &self.words {
            for k in 1..w.len() {
                s.insert(&w.0[k..]);
            }
        }
        s.len()
    }

    /// Content hash of the normalized set together with a block length.
    pub fn hash_with(&self, n: usize) -> String {
        let mut h = Sha256::new();
        h.update([self.alphabet_max]);
        h.update((n as u64).to_le_bytes());
        for w in &self.words {
            h.update((w.len() as u32).to_le_bytes());
            h.update(&w.0);
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(s: &str) -> Vec<Word> {
        s.split_whitespace().map(|x| x.parse().unwrap()).collect()
    }

    #[test]
    fn palindromes_stored_once_and_superwords_dropped() {
        let f = ForbiddenSet::new(2, &ws("21212 21112121 12111212 2121211"), true).unwrap();
        // 21212 is a palindrome; 2121211 and its reverse contain it
        assert_eq!(f.len(), 5);
        assert!(f.closed_under_reversal);
    }

    #[test]
    fn not_closed_without_reverses() {
        let f = ForbiddenSet::new(2, &ws("112"), false).unwrap();
        assert!(!f.closed_under_reversal);
        assert_eq!(f.distinct_suffixes(), 2);
    }
}
