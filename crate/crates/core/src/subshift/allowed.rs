use rayon::prelude::*;

use super::automaton::{Automaton, ROOT};
use super::forbidden::ForbiddenSet;
use crate::error::{Error, Result};
use crate::word::Word;

/// Longest supported block length (two bits per digit in a `u64`).
pub const MAX_N: usize = 32;

/// All words of length `n` avoiding the forbidden set, in lexicographic
/// order, packed two bits per digit (first digit most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllowedWords {
    pub alphabet_max: u8,
    pub n: usize,
    /// Set when `n` is shorter than `max |f| − 1`.
    pub n_override: bool,
    pub provenance: String,
    packed: Vec<u64>,
}

impl AllowedWords {
    pub fn from_packed(
        alphabet_max: u8,
        n: usize,
        n_override: bool,
        provenance: String,
        packed: Vec<u64>,
    ) -> Self {
        AllowedWords {
            alphabet_max,
            n,
            n_override,
            provenance,
            packed,
        }
    }

    pub fn len(&self) -> usize {
        self.packed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packed.is_empty()
    }

    pub fn packed(&self) -> &[u64] {
        &self.packed
    }

    /// Write the digits of word `i` into `buf` (length `n`).
    #[inline]
    pub fn digits_into(&self, i: usize, buf: &mut [u8]) {
        unpack(self.packed[i], self.n, buf)
    }

    pub fn word(&self, i: usize) -> Word {
        let mut buf = vec![0u8; self.n];
        self.digits_into(i, &mut buf);
        Word(buf)
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        if w.len() != self.n {
            return None;
        }
        self.packed.binary_search(&pack(w.digits())).ok()
    }
}

#[inline]
pub fn pack(digits: &[u8]) -> u64 {
    digits.iter().fold(0u64, |acc, &d| (acc << 2) | (d as u64 - 1))
}

#[inline]
pub fn unpack(code: u64, n: usize, buf: &mut [u8]) {
    for (i, b) in buf.iter_mut().enumerate().take(n) {
        *b = ((code >> (2 * (n - 1 - i))) & 3) as u8 + 1;
    }
}

/// Enumerate allowed words of length `n`. Errors if `n` is below the default
/// block length unless `allow_short` is set.
pub fn allowed_words_with(f: &ForbiddenSet, n: usize, allow_short: bool) -> Result<AllowedWords> {
    if n < 1 || n > MAX_N {
        return Err(Error::Invalid(format!("block length {n} outside 1..={MAX_N}")));
    }
    let short = n + 1 < f.max_len();
    if short && !allow_short {
        return Err(Error::Invalid(format!(
            "block length {n} below max forbidden length − 1 = {}",
            f.max_len() - 1
        )));
    }
    if short {
        log::warn!("block length {n} is shorter than the default {}", f.default_n());
    }
    let aut = Automaton::new(f.alphabet_max, &f.words);
    let a = f.alphabet_max;
    let split = n.min(3);
    // enumerate the first `split` digits, then fan out
    let mut heads = Vec::new();
    let mut stack = vec![(ROOT, 0usize, 0u64)];
    while let Some((s, d, code)) = stack.pop() {
        if d == split {
            heads.push((s, code));
            continue;
        }
        for digit in (1..=a).rev() {
            let t = aut.step(s, digit);
            if !aut.is_hit(t) {
                stack.push((t, d + 1, (code << 2) | (digit as u64 - 1)));
            }
        }
    }
    heads.sort_by_key(|&(_, c)| c);
    let parts: Vec<Vec<u64>> = heads
        .par_iter()
        .map(|&(s, code)| {
            let mut out = Vec::new();
            dfs(&aut, a, s, split, code, n, &mut out);
            out
        })
        .collect();
    let packed: Vec<u64> = parts.into_iter().flatten().collect();
    Ok(AllowedWords {
        alphabet_max: a,
        n,
        n_override: short,
        provenance: f.hash_with(n),
        packed,
    })
}

pub fn allowed_words(f: &ForbiddenSet, n: usize) -> Result<AllowedWords> {
    allowed_words_with(f, n, false)
}

fn dfs(aut: &Automaton, a: u8, s: u32, depth: usize, code: u64, n: usize, out: &mut Vec<u64>) {
    if depth == n {
        out.push(code);
        return;
    }
    for digit in 1..=a {
        let t = aut.step(s, digit);
        if !aut.is_hit(t) {
            dfs(aut, a, t, depth + 1, (code << 2) | (digit as u64 - 1), n, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_gives_all_words() {
        let f = ForbiddenSet::empty(2).unwrap();
        let a = allowed_words(&f, 5).unwrap();
        assert_eq!(a.len(), 32);
        assert_eq!(a.word(0), "11111".parse().unwrap());
        assert_eq!(a.word(31), "22222".parse().unwrap());
    }

    #[test]
    fn no_consecutive_equal() {
        let f = ForbiddenSet::new(2, &["11".parse().unwrap(), "22".parse().unwrap()], false).unwrap();
        let a = allowed_words(&f, 6).unwrap();
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn short_block_needs_override() {
        let f = ForbiddenSet::new(2, &["21212".parse().unwrap()], true).unwrap();
        assert!(allowed_words(&f, 2).is_err());
        let a = allowed_words_with(&f, 2, true).unwrap();
        assert!(a.n_override);
        assert_eq!(a.len(), 4);
    }
}
