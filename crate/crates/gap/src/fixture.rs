//! Text fixtures of gap inequalities.
//!
//! One inequality per line, `|`-separated:
//!
//! ```text
//! s | kind | terms | claim | expect | anchor
//! 0.153 | const | 0.00254@231, 1/63@113 | 1 | true | region (3.92, 3.9623)
//! 0.09  | words | 331312, 2131          | 0.985 | true | region (sqrt20, 4.4984)
//! ```
//!
//! `const` terms are constants, each optionally tagged with the continuation
//! word(s) it bounds (`c@w` or `c@w1+w2`). `words` terms are continuation
//! words whose exact ratio functions are summed. The inequality claims the
//! sum is `< claim`. Blank lines and `#` comments are skipped.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use cfdim_core::ball::parse_rational;
use cfdim_core::{BallMp, Error, Result, Word};

use crate::{constant_discrepancies, constant_sum, verify_gap_below, Discrepancy, GAP_PRECISION};

#[derive(Clone, Debug, PartialEq)]
pub enum Terms {
    Words(Vec<Word>),
    Constants(Vec<(String, Vec<Word>)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureLine {
    pub line_no: usize,
    pub s: String,
    pub terms: Terms,
    pub claim: String,
    pub expect: bool,
    pub anchor: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LineOutcome {
    pub line_no: usize,
    pub anchor: String,
    pub s: String,
    pub terms: String,
    pub claim: String,
    pub expected: bool,
    pub certified: bool,
    pub sum_lo: f64,
    pub sum_hi: f64,
    pub passed: bool,
}

fn perr(line_no: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line_no}: {msg}"))
}

fn parse_line(line_no: usize, raw: &str) -> Result<Option<FixtureLine>> {
    let line = raw.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let f: Vec<&str> = line.split('|').map(str::trim).collect();
    if f.len() != 6 {
        return Err(perr(line_no, format!("expected 6 fields, found {}", f.len())));
    }
    parse_rational(f[0]).map_err(|e| perr(line_no, e))?;
    parse_rational(f[3]).map_err(|e| perr(line_no, e))?;
    let items = f[2].split(',').map(str::trim).filter(|t| !t.is_empty());
    let word = |t: &str| t.parse::<Word>().map_err(|e| perr(line_no, e));
    let terms = match f[1] {
        "words" => Terms::Words(items.map(word).collect::<Result<_>>()?),
        "const" => Terms::Constants(
            items
                .map(|t| {
                    let (c, ws) = t.split_once('@').unwrap_or((t, ""));
                    parse_rational(c).map_err(|e| perr(line_no, e))?;
                    let ws = ws
                        .split('+')
                        .filter(|w| !w.is_empty())
                        .map(word)
                        .collect::<Result<_>>()?;
                    Ok((c.trim().to_string(), ws))
                })
                .collect::<Result<_>>()?,
        ),
        k => return Err(perr(line_no, format!("unknown kind {k:?}"))),
    };
    let empty = match &terms {
        Terms::Words(w) => w.is_empty(),
        Terms::Constants(c) => c.is_empty(),
    };
    if empty {
        return Err(perr(line_no, "no terms"));
    }
    let expect = match f[4] {
        "true" => true,
        "false" => false,
        e => return Err(perr(line_no, format!("expect must be true/false, got {e:?}"))),
    };
    Ok(Some(FixtureLine {
        line_no,
        s: f[0].to_string(),
        terms,
        claim: f[3].to_string(),
        expect,
        anchor: f[5].to_string(),
    }))
}

pub fn parse_fixture(text: &str) -> Result<Vec<FixtureLine>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(l) = parse_line(i + 1, raw)? {
            out.push(l);
        }
    }
    Ok(out)
}

pub fn load_fixture(path: &Path) -> Result<Vec<FixtureLine>> {
    parse_fixture(&std::fs::read_to_string(path)?)
}

/// The bundled inequality list.
pub fn builtin_fixture() -> Vec<FixtureLine> {
    parse_fixture(include_str!("../data/inequalities.txt")).expect("bundled fixture parses")
}

impl FixtureLine {
    pub fn terms_string(&self) -> String {
        match &self.terms {
            Terms::Words(ws) => ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", "),
            Terms::Constants(cs) => cs
                .iter()
                .map(|(c, _)| c.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        }
    }

    pub fn evaluate(&self) -> Result<LineOutcome> {
        let (certified, lo, hi) = match &self.terms {
            Terms::Words(ws) => {
                let g = verify_gap_below(ws, &self.s, &self.claim)?;
                (g.certified, g.sup_lo, g.sup_hi)
            }
            Terms::Constants(cs) => {
                let cs: Vec<&str> = cs.iter().map(|(c, _)| c.as_str()).collect();
                let sum = constant_sum(&cs, &self.s)?;
                let claim = BallMp::from_rational(&parse_rational(&self.claim)?, GAP_PRECISION);
                (sum.definitely_lt(&claim), sum.lo_f64(), sum.hi_f64())
            }
        };
        Ok(LineOutcome {
            line_no: self.line_no,
            anchor: self.anchor.clone(),
            s: self.s.clone(),
            terms: self.terms_string(),
            claim: self.claim.clone(),
            expected: self.expect,
            certified,
            sum_lo: lo,
            sum_hi: hi,
            passed: certified == self.expect,
        })
    }
}

/// Every tagged `(constant, word)` pair whose constant is below the true
/// supremum of the word's ratio function, deduplicated.
pub fn fixture_discrepancies(lines: &[FixtureLine]) -> Result<Vec<Discrepancy>> {
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for l in lines {
        if let Terms::Constants(cs) = &l.terms {
            for (c, ws) in cs {
                for w in ws {
                    if seen.insert((c.clone(), w.to_string())) {
                        pairs.push((c.clone(), w.clone()));
                    }
                }
            }
        }
    }
    constant_discrepancies(&pairs)
}
