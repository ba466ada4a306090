//! Aho–Corasick automaton over digits `1..=A`.
//!
//! A state is a prefix of some pattern; after reading a word the state is the
//! longest suffix of the word that is a pattern prefix. The set of all pattern
//! prefixes that are suffixes of the word is the failure chain of that state.

use std::collections::VecDeque;

use crate::word::Word;

pub(crate) const ROOT: u32 = 0;

#[derive(Clone, Debug)]
pub struct Automaton {
    alpha: usize,
    goto: Vec<u32>,
    fail: Vec<u32>,
    depth: Vec<u32>,
    /// Some pattern ends at this state or at a state on its failure chain.
    hit: Vec<bool>,
    /// For every state, the patterns having it as a proper nonempty prefix:
    /// `(pattern index, pattern length)`.
    prefix_of: Vec<Vec<(u32, u32)>>,
}

impl Automaton {
    pub fn new(alpha: u8, patterns: &[Word]) -> Self {
        let alpha = alpha as usize;
        let mut goto: Vec<Option<u32>> = vec![None; alpha];
        let mut depth = vec![0u32];
        let mut terminal = vec![false];
        let mut prefix_of: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
        for (pi, p) in patterns.iter().enumerate() {
            let mut s = 0usize;
            for (i, &d) in p.digits().iter().enumerate() {
                let c = d as usize - 1;
                s = match goto[s * alpha + c] {
                    Some(t) => t as usize,
                    None => {
                        let t = depth.len();
                        goto[s * alpha + c] = Some(t as u32);
                        goto.extend(std::iter::repeat(None).take(alpha));
                        depth.push(i as u32 + 1);
                        terminal.push(false);
                        prefix_of.push(Vec::new());
                        t
                    }
                };
                if i + 1 < p.len() {
                    prefix_of[s].push((pi as u32, p.len() as u32));
                }
            }
            terminal[s] = true;
        }
        let n = depth.len();
        let mut full = vec![0u32; n * alpha];
        let mut fail = vec![0u32; n];
        let mut hit = terminal.clone();
        let mut queue = VecDeque::new();
        for c in 0..alpha {
            match goto[c] {
                Some(t) => {
                    full[c] = t;
                    fail[t as usize] = 0;
                    queue.push_back(t);
                }
                None => full[c] = 0,
            }
        }
        while let Some(s) = queue.pop_front() {
            let s = s as usize;
            hit[s] = hit[s] || hit[fail[s] as usize];
            for c in 0..alpha {
                match goto[s * alpha + c] {
                    Some(t) => {
                        fail[t as usize] = full[fail[s] as usize * alpha + c];
                        full[s * alpha + c] = t;
                        queue.push_back(t);
                    }
                    None => full[s * alpha + c] = full[fail[s] as usize * alpha + c],
                }
            }
        }
        Automaton {
            alpha,
            goto: full,
            fail,
            depth,
            hit,
            prefix_of,
        }
    }

    pub fn num_states(&self) -> usize {
        self.depth.len()
    }

    #[inline]
    pub fn step(&self, s: u32, digit: u8) -> u32 {
        self.goto[s as usize * self.alpha + digit as usize - 1]
    }

    #[inline]
    pub fn is_hit(&self, s: u32) -> bool {
        self.hit[s as usize]
    }

    pub fn depth(&self, s: u32) -> u32 {
        self.depth[s as usize]
    }

    /// Run from state `s` over `digits`; `None` as soon as a pattern is hit.
    pub fn run(&self, mut s: u32, digits: &[u8]) -> Option<u32> {
        for &d in digits {
            s = self.step(s, d);
            if self.hit[s as usize] {
                return None;
            }
        }
        Some(s)
    }

    /// The failure chain of `s` without the root: all pattern prefixes that
    /// are suffixes of any word ending in state `s`.
    pub fn chain(&self, mut s: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while s != ROOT {
            out.push(s);
            s = self.fail[s as usize];
        }
        out
    }

    /// `(pattern, length)` pairs of patterns having state `s` as a proper prefix.
    pub fn prefix_of(&self, s: u32) -> &[(u32, u32)] {
        &self.prefix_of[s as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_patterns() {
        let a = Automaton::new(2, &["212".parse().unwrap(), "11".parse().unwrap()]);
        assert!(a.run(ROOT, &[2, 1, 2]).is_none());
        assert!(a.run(ROOT, &[1, 2, 1, 1]).is_none());
        assert!(a.run(ROOT, &[1, 2, 2, 2, 1]).is_some());
        let s = a.run(ROOT, &[1, 2, 2, 1]).unwrap();
        // longest suffix of 1221 that is a pattern prefix is "21"
        assert_eq!(a.depth(s), 2);
    }
}
