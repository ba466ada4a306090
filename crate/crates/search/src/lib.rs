//! Discovery of forbidden `{1,2}` strings against a Markov-value threshold by
//! recursive subdivision of `J` intervals, and checks of printed `J` data.

use std::collections::{BTreeSet, VecDeque};

use rug::Rational;
use serde::{Deserialize, Serialize};

use cfdim_core::ball::parse_rational;
use cfdim_core::cf::{eval_periodic, j_endpoints, j_interval};
use cfdim_core::{BallMp, Error, Mp, PointedWord, Result, TailSpec, Word};

pub mod tables;

pub use tables::{parse_tables, TableRow};

/// Default precision for `J` enclosures.
pub const SEARCH_PRECISION: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// `J` lies entirely above the threshold.
    Exclude,
    /// `J` lies entirely below the threshold.
    Abandon,
    /// The threshold is strictly inside `J`.
    Subdivide,
    /// Undecided at the working precision.
    Open,
}

impl Status {
    pub fn letter(self) -> char {
        match self {
            Status::Exclude => 'E',
            Status::Abandon => 'A',
            Status::Subdivide => 'S',
            Status::Open => 'O',
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub pointed: PointedWord,
    pub interval: BallMp,
    pub status: Status,
    /// Excluded because the word contains an already forbidden word; the
    /// interval is the parent's.
    pub pruned: bool,
    /// Precision (bits) the classification was decided at.
    pub precision: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Extend the side whose children have the smaller widest interval.
    LargestGap,
    Fixed(Side),
    /// One side per subdivision in breadth-first order, then `LargestGap`.
    Schedule(Vec<Side>),
}

impl std::str::FromStr for Policy {
    type Err = Error;

    /// `largest-gap`, `left`, `right`, or a schedule string of `L`/`R`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "largest-gap" => Ok(Policy::LargestGap),
            "left" => Ok(Policy::Fixed(Side::Left)),
            "right" => Ok(Policy::Fixed(Side::Right)),
            t if !t.is_empty() && t.chars().all(|c| c == 'L' || c == 'R') => Ok(Policy::Schedule(
                t.chars()
                    .map(|c| if c == 'L' { Side::Left } else { Side::Right })
                    .collect(),
            )),
            t => Err(Error::Parse(format!("unknown policy {t:?}"))),
        }
    }
}

fn classify_at(pw: &PointedWord, t: &BallMp, prec: u32) -> Result<(BallMp, Status)> {
    let j = j_interval::<Mp>(pw, prec)?;
    let status = if j.definitely_gt(t) {
        Status::Exclude
    } else if j.definitely_lt(t) {
        Status::Abandon
    } else if j.lo < t.lo && t.hi < j.hi {
        Status::Subdivide
    } else {
        Status::Open
    };
    Ok((j, status))
}

/// Classify `J(pw)` against `threshold`; an undecided result is retried once
/// at doubled precision.
pub fn classify(pw: &PointedWord, threshold: &Rational, prec: u32) -> Result<SearchNode> {
    let t = BallMp::from_rational(threshold, prec * 2);
    let (mut interval, mut status) = classify_at(pw, &t, prec)?;
    let mut precision = prec;
    if status == Status::Open {
        precision = prec * 2;
        (interval, status) = classify_at(pw, &t, precision)?;
    }
    Ok(SearchNode {
        pointed: pw.clone(),
        interval,
        status,
        pruned: false,
        precision,
    })
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub threshold: Rational,
    pub policy: Policy,
    pub max_nodes: usize,
    pub precision: u32,
    /// Words already known to be forbidden; children containing one of them
    /// (or its reverse) are excluded without computing `J`.
    pub known_forbidden: Vec<Word>,
}

impl SearchConfig {
    pub fn new(threshold: &str) -> Result<Self> {
        Ok(SearchConfig {
            threshold: parse_rational(threshold)?,
            policy: Policy::LargestGap,
            max_nodes: 10_000,
            precision: SEARCH_PRECISION,
            known_forbidden: Vec::new(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Minimal forbidden words, closed under reversal.
    pub forbidden: Vec<Word>,
    /// Upper bound on the right endpoints of all non-excluded leaves.
    pub upper_candidate: Option<BallMp>,
    pub tree: Vec<SearchNode>,
    pub budget_exhausted: bool,
}

fn contains_any(w: &Word, set: &BTreeSet<Word>) -> bool {
    set.iter().any(|f| w.contains(f))
}

fn children(pw: &PointedWord, side: Side) -> [PointedWord; 2] {
    match side {
        Side::Left => [pw.push_left(1), pw.push_left(2)],
        Side::Right => [pw.push_right(1), pw.push_right(2)],
    }
}

fn largest_gap_side(pw: &PointedWord, prec: u32) -> Result<Side> {
    let widest = |side| -> Result<f64> {
        let mut w: f64 = 0.0;
        for c in children(pw, side) {
            w = w.max(j_interval::<Mp>(&c, prec)?.width_f64());
        }
        Ok(w)
    };
    Ok(if widest(Side::Left)? < widest(Side::Right)? {
        Side::Left
    } else {
        Side::Right
    })
}

fn max_hi(acc: Option<BallMp>, b: &BallMp) -> Option<BallMp> {
    let hi = BallMp::new(b.hi.clone(), b.hi.clone());
    match acc {
        Some(a) if a.hi >= hi.hi => Some(a),
        _ => Some(hi),
    }
}

/// Breadth-first subdivision of `J(seed)` against the threshold.
pub fn explore(seed: &PointedWord, cfg: &SearchConfig) -> Result<SearchResult> {
    let mut forbidden: BTreeSet<Word> = BTreeSet::new();
    let mut known: BTreeSet<Word> = BTreeSet::new();
    for w in &cfg.known_forbidden {
        known.insert(w.clone());
        known.insert(w.reversed());
    }
    let mut tree = Vec::new();
    let mut upper = None;
    let mut budget_exhausted = false;
    let mut schedule_pos = 0usize;
    let mut queue = VecDeque::new();

    let root = classify(seed, &cfg.threshold, cfg.precision)?;
    queue.push_back(tree.len());
    tree.push(root);

    while let Some(i) = queue.pop_front() {
        let node = tree[i].clone();
        match node.status {
            Status::Exclude => {
                if !node.pruned && !contains_any(&node.pointed.word, &forbidden) {
                    forbidden.insert(node.pointed.word.clone());
                    forbidden.insert(node.pointed.word.reversed());
                }
            }
            Status::Abandon | Status::Open => upper = max_hi(upper, &node.interval),
            Status::Subdivide => {
                if tree.len() + 2 > cfg.max_nodes {
                    budget_exhausted = true;
                    upper = max_hi(upper, &node.interval);
                    continue;
                }
                let side = match &cfg.policy {
                    Policy::Fixed(s) => *s,
                    Policy::Schedule(v) if schedule_pos < v.len() => {
                        schedule_pos += 1;
                        v[schedule_pos - 1]
                    }
                    _ => largest_gap_side(&node.pointed, cfg.precision)?,
                };
                for c in children(&node.pointed, side) {
                    let child = if contains_any(&c.word, &known) || contains_any(&c.word, &forbidden) {
                        SearchNode {
                            pointed: c,
                            interval: node.interval.clone(),
                            status: Status::Exclude,
                            pruned: true,
                            precision: node.precision,
                        }
                    } else {
                        classify(&c, &cfg.threshold, cfg.precision)?
                    };
                    queue.push_back(tree.len());
                    tree.push(child);
                }
            }
        }
    }

    // keep only minimal words
    let all: Vec<Word> = forbidden.iter().cloned().collect();
    let mut minimal: Vec<Word> = all
        .iter()
        .filter(|w| !all.iter().any(|o| o != *w && w.contains(o)))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(SearchResult {
        forbidden: minimal,
        upper_candidate: upper,
        tree,
        budget_exhausted,
    })
}

/// A search job as read from a script file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchScript {
    pub seed: String,
    /// Decimal string, parsed exactly.
    pub threshold: String,
    /// `largest-gap`, `left`, `right` or an `L`/`R` schedule.
    #[serde(default = "default_policy")]
    pub policy: String,
    #[serde(default = "default_budget")]
    pub max_nodes: usize,
    #[serde(default)]
    pub known_forbidden: Vec<String>,
}

fn default_policy() -> String {
    "largest-gap".into()
}

fn default_budget() -> usize {
    10_000
}

impl SearchScript {
    pub fn config(&self) -> Result<(PointedWord, SearchConfig)> {
        let seed: PointedWord = self.seed.parse()?;
        let mut cfg = SearchConfig::new(&self.threshold)?;
        cfg.policy = self.policy.parse()?;
        cfg.max_nodes = self.max_nodes;
        cfg.known_forbidden = self
            .known_forbidden
            .iter()
            .map(|w| w.parse())
            .collect::<Result<_>>()?;
        Ok((seed, cfg))
    }

    pub fn run(&self) -> Result<SearchResult> {
        let (seed, cfg) = self.config()?;
        explore(&seed, &cfg)
    }
}

/// Extension depth used by [`j_endpoints_avoiding`].
pub const AVOID_DEPTH: usize = 10;

/// Outer enclosures of the endpoints of `J(pw)` restricted to extensions
/// that avoid `forbidden` (and reverses).
///
/// Each side is extended by every `{1,2}` word of length `depth` that keeps
/// `pw` plus the extension free of forbidden words, and closed with the
/// extremal alternating tails. Constraints straddling both sides are
/// ignored, so the result contains the constrained `J`. `None` when no
/// extension survives.
pub fn j_endpoints_avoiding(
    pw: &PointedWord,
    forbidden: &[Word],
    depth: usize,
    prec: u32,
) -> Result<Option<(BallMp, BallMp)>> {
    pw.word.check_alphabet(2)?;
    let mut bad: BTreeSet<Word> = BTreeSet::new();
    for w in forbidden {
        bad.insert(w.clone());
        bad.insert(w.reversed());
    }
    // (min over lo-tails, max over hi-tails) of [0; fixed, ext, tail]
    let side = |fixed: &[u8], glue: &dyn Fn(&[u8]) -> Word| -> Option<(BallMp, BallMp)> {
        let mut best: Option<(BallMp, BallMp)> = None;
        for code in 0..(1u32 << depth) {
            let ext: Vec<u8> = (0..depth).map(|i| 1 + ((code >> i) & 1) as u8).collect();
            if contains_any(&glue(&ext), &bad) {
                continue;
            }
            let mut digits = fixed.to_vec();
            digits.extend_from_slice(&ext);
            let n = digits.len();
            let (hi_tail, lo_tail) = if n % 2 == 0 {
                (TailSpec::one_two(), TailSpec::two_one())
            } else {
                (TailSpec::two_one(), TailSpec::one_two())
            };
            let hi = eval_periodic::<Mp>(&TailSpec::behind(&digits, &hi_tail), prec);
            let lo = eval_periodic::<Mp>(&TailSpec::behind(&digits, &lo_tail), prec);
            best = Some(match best {
                None => (lo, hi),
                Some((l, h)) => (
                    if lo.lo < l.lo { lo } else { l },
                    if hi.hi > h.hi { hi } else { h },
                ),
            });
        }
        best
    };
    let right_glue = |ext: &[u8]| {
        let mut w = pw.word.0.clone();
        w.extend_from_slice(ext);
        Word(w)
    };
    let left_glue = |ext: &[u8]| {
        // ext is read outward from the word
        let mut w: Vec<u8> = ext.iter().rev().copied().collect();
        w.extend_from_slice(&pw.word.0);
        Word(w)
    };
    let Some((rlo, rhi)) = side(pw.right(), &right_glue) else {
        return Ok(None);
    };
    let Some((llo, lhi)) = side(&pw.left_outward(), &left_glue) else {
        return Ok(None);
    };
    let a0 = BallMp::from_i64(pw.a0() as i64, prec);
    Ok(Some((
        a0.add_ball(&rlo).add_ball(&llo),
        a0.add_ball(&rhi).add_ball(&lhi),
    )))
}

/// Outcome of checking a printed interval against the rigorous `J`.
#[derive(Clone, Debug, Serialize)]
pub struct RowCheck {
    pub passed: bool,
    pub j_lo: f64,
    pub j_hi: f64,
    /// An endpoint agrees with the printed value to within its enclosure
    /// (closed-form endpoints such as `sqrt(12)`).
    pub endpoint_tie: bool,
}

/// Whether `[claimed_lo, claimed_hi]` contains `J(pw)`. Claims are exact
/// decimals or closed-form expressions like `sqrt(12)`.
pub fn verify_table_row(pw: &PointedWord, claimed_lo: &str, claimed_hi: &str) -> Result<RowCheck> {
    verify_table_row_given(pw, claimed_lo, claimed_hi, &[])
}

/// [`verify_table_row`] where `J` is restricted to extensions avoiding the
/// already excluded words `given`.
pub fn verify_table_row_given(
    pw: &PointedWord,
    claimed_lo: &str,
    claimed_hi: &str,
    given: &[Word],
) -> Result<RowCheck> {
    let prec = 256;
    let (jlo, jhi) = if given.is_empty() {
        j_endpoints::<Mp>(pw, prec)?
    } else {
        j_endpoints_avoiding(pw, given, AVOID_DEPTH, prec)?.ok_or_else(|| {
            Error::Invalid(format!("{pw} has no extension avoiding the given words"))
        })?
    };
    let clo = BallMp::parse_expr(claimed_lo, prec)?;
    let chi = BallMp::parse_expr(claimed_hi, prec)?;
    let mut tie = false;
    let mut side_ok = |inside: bool, a: &BallMp, b: &BallMp| {
        if inside {
            true
        } else if a.intersect(b).is_some() {
            tie = true;
            true
        } else {
            false
        }
    };
    let lo_ok = side_ok(clo.hi <= jlo.lo, &clo, &jlo);
    let hi_ok = side_ok(jhi.hi <= chi.lo, &chi, &jhi);
    Ok(RowCheck {
        passed: lo_ok && hi_ok,
        j_lo: jlo.lo_f64(),
        j_hi: jhi.hi_f64(),
        endpoint_tie: tie,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(s: &str) -> PointedWord {
        s.parse().unwrap()
    }

    fn t1() -> Rational {
        parse_rational("3.334369").unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&pw("212*12"), &t1(), 128).unwrap().status, Status::Exclude);
        assert_eq!(classify(&pw("112*11"), &t1(), 128).unwrap().status, Status::Abandon);
        assert_eq!(classify(&pw("112*12"), &t1(), 128).unwrap().status, Status::Subdivide);
    }

    #[test]
    fn policies_parse() {
        assert_eq!("left".parse::<Policy>().unwrap(), Policy::Fixed(Side::Left));
        assert_eq!(
            "LRR".parse::<Policy>().unwrap(),
            Policy::Schedule(vec![Side::Left, Side::Right, Side::Right])
        );
        assert!("up".parse::<Policy>().is_err());
    }

    #[test]
    fn table_row_examples() {
        assert!(verify_table_row(&pw("2112*12"), "3.2802", "3.3193").unwrap().passed);
        assert!(!verify_table_row(&pw("2112*12"), "3.29", "3.31").unwrap().passed);
        let r = verify_table_row(&pw("212*12"), "3.4", "sqrt(12)").unwrap();
        assert!(r.passed && r.endpoint_tie);
    }
}
