use std::collections::{BTreeSet, HashMap};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::Direction;

use rayon::prelude::*;

use super::allowed::{allowed_words, AllowedWords};
use super::automaton::{Automaton, ROOT};
use super::forbidden::ForbiddenSet;
use crate::error::{Error, Result};
use crate::word::Word;

/// Whether `w1 · w2` is free of forbidden words across the boundary.
pub fn compatible(w1: &Word, w2: &Word, f: &ForbiddenSet) -> bool {
    let c = w1.concat(w2);
    let cut = w1.len();
    for d in &f.words {
        let l = d.len();
        if l > c.len() {
            continue;
        }
        for p in cut.saturating_sub(l - 1)..cut.min(c.len() - l + 1) {
            if p + l > cut && c.0[p..p + l] == d.0[..] {
                return false;
            }
        }
    }
    true
}

/// One equivalence class of allowed words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassInfo {
    /// Sorted `(forbidden word index, length)` pairs; a prefix class and a
    /// suffix class are compatible iff their encodings share no pair.
    pub encoding: Vec<(u32, u32)>,
    pub size: usize,
    /// Index (into the allowed words) of the lexicographically smallest member.
    pub representative: usize,
}

/// Partitions of the allowed words by the forbidden-word suffixes they start
/// with (`suffix`) and by the forbidden-word prefixes they end with (`prefix`).
#[derive(Clone, Debug)]
pub struct EquivalenceClasses {
    pub suffix_classes: Vec<ClassInfo>,
    pub prefix_classes: Vec<ClassInfo>,
    pub suffix_of_word: Vec<u32>,
    pub prefix_of_word: Vec<u32>,
}

impl EquivalenceClasses {
    pub fn compatible(&self, prefix_class: usize, suffix_class: usize) -> bool {
        disjoint(
            &self.prefix_classes[prefix_class].encoding,
            &self.suffix_classes[suffix_class].encoding,
        )
    }
}

fn disjoint(a: &[(u32, u32)], b: &[(u32, u32)]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

pub fn equivalence_classes(a: &AllowedWords, f: &ForbiddenSet) -> EquivalenceClasses {
    let fwd = Automaton::new(f.alphabet_max, &f.words);
    let rev_words: Vec<Word> = f.words.iter().map(|w| w.reversed()).collect();
    let rev = Automaton::new(f.alphabet_max, &rev_words);
    let n = a.n;
    let states: Vec<(u32, u32)> = (0..a.len())
        .into_par_iter()
        .with_min_len(4096)
        .map_init(
            || vec![0u8; n],
            |buf, i| {
                a.digits_into(i, buf);
                let mut s = ROOT;
                for &d in buf.iter() {
                    s = fwd.step(s, d);
                }
                let mut r = ROOT;
                for &d in buf.iter().rev() {
                    r = rev.step(r, d);
                }
                (s, r)
            },
        )
        .collect();

    let mut pmap: HashMap<u32, u32> = HashMap::new();
    let mut smap: HashMap<u32, u32> = HashMap::new();
    let mut prefix_classes: Vec<ClassInfo> = Vec::new();
    let mut suffix_classes: Vec<ClassInfo> = Vec::new();
    let mut prefix_of_word = Vec::with_capacity(a.len());
    let mut suffix_of_word = Vec::with_capacity(a.len());
    for (i, &(s, r)) in states.iter().enumerate() {
        let pc = *pmap.entry(s).or_insert_with(|| {
            let mut enc = BTreeSet::new();
            for t in fwd.chain(s) {
                for &(j, len) in fwd.prefix_of(t) {
                    enc.insert((j, len - fwd.depth(t)));
                }
            }
            prefix_classes.push(ClassInfo {
                encoding: enc.into_iter().collect(),
                size: 0,
                representative: i,
            });
            prefix_classes.len() as u32 - 1
        });
        prefix_classes[pc as usize].size += 1;
        prefix_of_word.push(pc);
        let sc = *smap.entry(r).or_insert_with(|| {
            let mut enc = BTreeSet::new();
            for t in rev.chain(r) {
                for &(j, _) in rev.prefix_of(t) {
                    enc.insert((j, rev.depth(t)));
                }
            }
            suffix_classes.push(ClassInfo {
                encoding: enc.into_iter().collect(),
                size: 0,
                representative: i,
            });
            suffix_classes.len() as u32 - 1
        });
        suffix_classes[sc as usize].size += 1;
        suffix_of_word.push(sc);
    }
    EquivalenceClasses {
        suffix_classes,
        prefix_classes,
        suffix_of_word,
        prefix_of_word,
    }
}

/// The compatibility matrix of allowed words, quotiented by identical rows
/// and identical columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedMarkov {
    /// Number of distinct columns.
    pub k: usize,
    /// Number of distinct rows.
    pub k_rows: usize,
    /// Row-major `k_rows × k` 0/1 matrix.
    pub matrix: Vec<u8>,
    /// Allowed-word index → row class (which words may follow it).
    pub row_map: Vec<u32>,
    /// Allowed-word index → column class (which words may precede it).
    pub col_map: Vec<u32>,
    pub row_reps: Vec<usize>,
    pub col_reps: Vec<usize>,
    /// Distinct proper suffixes of forbidden words.
    pub suffix_bound: usize,
    pub raw_prefix_classes: usize,
    pub raw_suffix_classes: usize,
    pub irreducible: bool,
    /// Sorted column classes on or between cycles of the class graph.
    pub essential: Vec<u32>,
    pub provenance: String,
}

impl ReducedMarkov {
    #[inline]
    pub fn mhat(&self, row: usize, col: usize) -> bool {
        self.matrix[row * self.k + col] != 0
    }

    /// Entry of the full matrix: can word `b` follow word `a`.
    pub fn m(&self, a: usize, b: usize) -> bool {
        self.mhat(self.row_map[a] as usize, self.col_map[b] as usize)
    }

    /// Distinct `(row class, column class)` pairs that occur, sorted.
    pub fn occupied_pairs(&self) -> Vec<(u32, u32)> {
        let set: BTreeSet<(u32, u32)> = self
            .row_map
            .iter()
            .zip(&self.col_map)
            .map(|(&r, &c)| (r, c))
            .collect();
        set.into_iter().collect()
    }
}

pub fn reduced_markov(f: &ForbiddenSet, n: usize) -> Result<ReducedMarkov> {
    let a = allowed_words(f, n)?;
    reduced_markov_from(f, &a)
}

pub fn reduced_markov_from(f: &ForbiddenSet, a: &AllowedWords) -> Result<ReducedMarkov> {
    if a.is_empty() {
        return Err(Error::EmptySubshift(a.n));
    }
    if a.provenance != f.hash_with(a.n) {
        return Err(Error::Provenance("allowed words built from another forbidden set".into()));
    }
    let ec = equivalence_classes(a, f);
    let np = ec.prefix_classes.len();
    let ns = ec.suffix_classes.len();
    let raw: Vec<Vec<u8>> = (0..np)
        .map(|p| (0..ns).map(|s| ec.compatible(p, s) as u8).collect())
        .collect();
    // merge identical columns, then identical rows
    let mut col_key: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut raw_col_to = vec![0u32; ns];
    let mut col_raw_rep = Vec::new();
    for s in 0..ns {
        let key: Vec<u8> = (0..np).map(|p| raw[p][s]).collect();
        let next = col_key.len() as u32;
        let id = *col_key.entry(key).or_insert_with(|| {
            col_raw_rep.push(s);
            next
        });
        raw_col_to[s] = id;
    }
    let k = col_key.len();
    let mut row_key: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut raw_row_to = vec![0u32; np];
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut row_raw_rep = Vec::new();
    for p in 0..np {
        let key: Vec<u8> = col_raw_rep.iter().map(|&s| raw[p][s]).collect();
        let next = row_key.len() as u32;
        let id = *row_key.entry(key.clone()).or_insert_with(|| {
            rows.push(key);
            row_raw_rep.push(p);
            next
        });
        raw_row_to[p] = id;
    }
    let k_rows = rows.len();
    let matrix: Vec<u8> = rows.into_iter().flatten().collect();
    let row_map: Vec<u32> = ec.prefix_of_word.iter().map(|&p| raw_row_to[p as usize]).collect();
    let col_map: Vec<u32> = ec.suffix_of_word.iter().map(|&s| raw_col_to[s as usize]).collect();
    // raw classes are numbered by first appearance, so the first raw member
    // carries the smallest word
    let row_reps = row_raw_rep.iter().map(|&p| ec.prefix_classes[p].representative).collect();
    let col_reps = col_raw_rep.iter().map(|&s| ec.suffix_classes[s].representative).collect();
    let suffix_bound = f.distinct_suffixes();
    if k > suffix_bound + 1 || k_rows > suffix_bound + 1 {
        return Err(Error::Invalid(format!(
            "class count {k}/{k_rows} exceeds the suffix bound {}",
            suffix_bound + 1
        )));
    }
    let mut rm = ReducedMarkov {
        k,
        k_rows,
        matrix,
        row_map,
        col_map,
        row_reps,
        col_reps,
        suffix_bound,
        raw_prefix_classes: np,
        raw_suffix_classes: ns,
        irreducible: true,
        essential: Vec::new(),
        provenance: a.provenance.clone(),
    };
    let (irreducible, essential) = class_core(&rm);
    rm.irreducible = irreducible;
    rm.essential = essential;
    if !rm.irreducible {
        log::warn!(
            "class graph is not strongly connected; {} of {} classes are essential",
            rm.essential.len(),
            rm.k
        );
    }
    Ok(rm)
}

/// Graph on column classes: `l → k` when a word of column class `l` may be
/// followed by a word of column class `k`.
fn class_graph(rm: &ReducedMarkov) -> DiGraph<(), ()> {
    let k = rm.k;
    let mut adj = vec![false; k * k];
    for (r, l) in rm.occupied_pairs() {
        for c in 0..k {
            if rm.mhat(r as usize, c) {
                adj[l as usize * k + c] = true;
            }
        }
    }
    let mut g = DiGraph::with_capacity(k, 0);
    for _ in 0..k {
        g.add_node(());
    }
    for (i, _) in adj.iter().enumerate().filter(|(_, &e)| e) {
        g.add_edge(NodeIndex::new(i / k), NodeIndex::new(i % k), ());
    }
    g
}

/// Returns (strongly connected, essential classes). A class is essential
/// when it can be reached from a cycle and can reach a cycle; every
/// infinite path eventually stays among essential classes.
fn class_core(rm: &ReducedMarkov) -> (bool, Vec<u32>) {
    let g = class_graph(rm);
    let sccs = tarjan_scc(&g);
    let k = rm.k;
    let mut cyclic = vec![false; k];
    for c in &sccs {
        let nontrivial = c.len() > 1 || g.contains_edge(c[0], c[0]);
        if nontrivial {
            for n in c {
                cyclic[n.index()] = true;
            }
        }
    }
    let sweep = |dir: Direction| {
        let mut seen = cyclic.clone();
        let mut stack: Vec<NodeIndex> =
            (0..k).filter(|&i| cyclic[i]).map(NodeIndex::new).collect();
        while let Some(u) = stack.pop() {
            for v in g.neighbors_directed(u, dir) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    let from_cycle = sweep(Direction::Outgoing);
    let to_cycle = sweep(Direction::Incoming);
    let core = (0..k).filter(|&i| from_cycle[i] && to_cycle[i]).map(|i| i as u32).collect();
    (sccs.len() == 1, core)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn compatible_examples() {
        let f = ForbiddenSet::new(2, &[w("21212")], true).unwrap();
        assert!(!compatible(&w("2121"), &w("2111"), &f));
        assert!(compatible(&w("2121"), &w("1111"), &f));
        let g = ForbiddenSet::new(2, &[w("11"), w("22")], false).unwrap();
        assert!(!compatible(&w("12"), &w("21"), &g));
        let e = ForbiddenSet::empty(2).unwrap();
        assert!(compatible(&w("2222"), &w("2222"), &e));
    }

    #[test]
    fn empty_set_single_class() {
        let f = ForbiddenSet::empty(2).unwrap();
        let rm = reduced_markov(&f, 10).unwrap();
        assert_eq!(rm.row_map.len(), 1024);
        assert_eq!((rm.k, rm.k_rows), (1, 1));
        assert!(rm.mhat(0, 0));
    }

    #[test]
    fn expansion_matches_brute_force_212() {
        let f = ForbiddenSet::new(2, &[w("212")], true).unwrap();
        let a = allowed_words(&f, 2).unwrap();
        let rm = reduced_markov_from(&f, &a).unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert_eq!(rm.m(i, j), compatible(&a.word(i), &a.word(j), &f));
            }
        }
    }
}
