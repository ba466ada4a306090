//! Fixture of printed `J` intervals.
//!
//! Format: `table | vertex | pointed | lo | hi | action [| given]`, with
//! `let NAME = pointed` lines defining substitutions written `{NAME}`.
//! `given` lists already excluded words the printed interval relies on.

use std::collections::BTreeMap;

use serde::Serialize;

use cfdim_core::{Error, PointedWord, Result, Word};

use crate::{verify_table_row_given, Status};

#[derive(Clone, Debug)]
pub struct TableRow {
    pub line_no: usize,
    pub table: String,
    pub vertex: String,
    pub source: String,
    pub pointed: PointedWord,
    pub lo: String,
    pub hi: String,
    pub action: Status,
    pub given: Vec<Word>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowOutcome {
    pub line_no: usize,
    pub table: String,
    pub vertex: String,
    pub pointed: String,
    pub claimed: (String, String),
    pub j_lo: f64,
    pub j_hi: f64,
    pub endpoint_tie: bool,
    pub passed: bool,
}

fn perr(line_no: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line_no}: {msg}"))
}

fn substitute(s: &str, defs: &BTreeMap<String, String>, line_no: usize) -> Result<String> {
    let mut out = String::new();
    let mut rest = s;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let j = rest[i..]
            .find('}')
            .ok_or_else(|| perr(line_no, "unclosed '{'"))?;
        let name = &rest[i + 1..i + j];
        let v = defs
            .get(name)
            .ok_or_else(|| perr(line_no, format!("undefined name {name:?}")))?;
        out.push_str(v);
        rest = &rest[i + j + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn parse_tables(text: &str) -> Result<Vec<TableRow>> {
    let mut defs = BTreeMap::new();
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(def) = line.strip_prefix("let ") {
            let (name, val) = def
                .split_once('=')
                .ok_or_else(|| perr(line_no, "expected `let NAME = word`"))?;
            defs.insert(name.trim().to_string(), val.trim().to_string());
            continue;
        }
        let f: Vec<&str> = line.split('|').map(str::trim).collect();
        if f.len() != 6 && f.len() != 7 {
            return Err(perr(line_no, format!("expected 6 or 7 fields, found {}", f.len())));
        }
        let expanded = substitute(f[2], &defs, line_no)?;
        let pointed: PointedWord = expanded.parse().map_err(|e| perr(line_no, e))?;
        let action = match f[5] {
            "E" => Status::Exclude,
            "A" => Status::Abandon,
            "S" => Status::Subdivide,
            a => return Err(perr(line_no, format!("unknown action {a:?}"))),
        };
        let given = match f.get(6) {
            Some(g) => g
                .split(',')
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(|w| w.parse::<Word>().map_err(|e| perr(line_no, e)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        rows.push(TableRow {
            line_no,
            table: f[0].to_string(),
            vertex: f[1].to_string(),
            source: f[2].to_string(),
            pointed,
            lo: f[3].to_string(),
            hi: f[4].to_string(),
            action,
            given,
        });
    }
    Ok(rows)
}

/// The bundled interval tables.
pub fn builtin_tables() -> Vec<TableRow> {
    parse_tables(include_str!("../data/tables.txt")).expect("bundled tables parse")
}

impl TableRow {
    pub fn check(&self) -> Result<RowOutcome> {
        let r = verify_table_row_given(&self.pointed, &self.lo, &self.hi, &self.given)?;
        Ok(RowOutcome {
            line_no: self.line_no,
            table: self.table.clone(),
            vertex: self.vertex.clone(),
            pointed: self.pointed.to_string(),
            claimed: (self.lo.clone(), self.hi.clone()),
            j_lo: r.j_lo,
            j_hi: r.j_hi,
            endpoint_tie: r.endpoint_tie,
            passed: r.passed,
        })
    }
}
