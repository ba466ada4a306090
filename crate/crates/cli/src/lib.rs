//! Command-line front end: configuration, orchestration and reports.

pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rug::Rational;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cfdim_core::ball::parse_rational;
use cfdim_core::cache::Cache;
use cfdim_core::certify::Direction;
use cfdim_core::pipeline::{bisect_dimension, prepare, run_at, spectral_at, PipelineOptions, PointRun, Prepared};
use cfdim_gap::fixture::{builtin_fixture, fixture_discrepancies, load_fixture};
use cfdim_search::tables::{builtin_tables, parse_tables};
use cfdim_search::{SearchScript, Status};

pub use config::JobConfig;

/// Estimated certification cost `#A × P × K` above which `--allow-long` is
/// required.
pub const LONG_RUN_COST: f64 = 1e10;

#[derive(Debug, Parser)]
#[command(name = "cfdim", version, about = "Certified dimension bounds for continued-fraction Cantor sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write a machine-readable report here (`-` for stdout).
    #[arg(long, global = true)]
    pub report_json: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allowed-word count and reduced matrix size.
    MatrixStats(JobArgs),
    /// Certify at the given t values, or bisect a bracket.
    Dim(JobArgs),
    /// Certify at the given t values.
    Certify(JobArgs),
    /// Run a forbidden-word search script.
    Search(SearchArgs),
    /// Check printed J intervals against rigorous enclosures.
    VerifyTables(FixtureArgs),
    /// Certify the gap inequalities of a fixture.
    GapCheck(FixtureArgs),
}

#[derive(Debug, Default, Args)]
pub struct JobArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in set name.
    #[arg(long)]
    pub set: Option<String>,
    /// Extra forbidden words.
    #[arg(long = "word")]
    pub words: Vec<String>,
    #[arg(long = "t")]
    pub t: Vec<String>,
    #[arg(long)]
    pub t_lo: Option<String>,
    #[arg(long)]
    pub t_hi: Option<String>,
    /// Stop bisecting once the bracket is this narrow.
    #[arg(long)]
    pub width: Option<String>,
    /// Block length override.
    #[arg(long)]
    pub n: Option<usize>,
    /// Collocation nodes per class.
    #[arg(long = "degree")]
    pub m: Option<usize>,
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long)]
    pub partition: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub allow_long: bool,
    /// Certify at exactly the given partition and precision.
    #[arg(long)]
    pub no_escalate: bool,
    /// Only compute the leading eigenvalue at each t (no certificate).
    #[arg(long)]
    pub eigen_only: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// TOML script: seed, threshold, policy, max_nodes, known_forbidden.
    pub script: PathBuf,
    /// Write the forbidden words here, one per line.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Fixture file; the bundled one when omitted.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status3 {
    Passed,
    Undecided,
    Failed,
}

impl Status3 {
    pub fn exit_code(self) -> u8 {
        match self {
            Status3::Passed => 0,
            Status3::Undecided => 2,
            Status3::Failed => 1,
        }
    }
}

/// Plain-text and JSON forms of one command's result.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub status: Status3,
}

fn versions() -> Value {
    json!({ "cfdim": env!("CARGO_PKG_VERSION"), "cache_format": cfdim_core::cache::FORMAT_VERSION })
}

fn input_hash<T: Serialize>(x: &T) -> String {
    let bytes = serde_json::to_vec(x).unwrap_or_default();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::MatrixStats(a) => matrix_stats(&resolve(a, cli.threads)?),
        Command::Dim(a) => dim(&resolve(a, cli.threads)?, a, true),
        Command::Certify(a) => dim(&resolve(a, cli.threads)?, a, false),
        Command::Search(a) => search(a),
        Command::VerifyTables(a) => verify_tables(a),
        Command::GapCheck(a) => gap_check(a),
    }
}

/// Merge a config file with flags; flags win.
pub fn resolve(a: &JobArgs, threads: Option<usize>) -> Result<JobConfig> {
    let mut c = match &a.config {
        Some(p) => JobConfig::load(p)?,
        None => JobConfig::default(),
    };
    if a.set.is_some() {
        c.set = a.set.clone();
    }
    c.forbidden.extend(a.words.iter().cloned());
    if !a.t.is_empty() {
        c.t = a.t.clone();
    }
    macro_rules! over {
        ($($f:ident <- $v:expr),*) => { $( if let Some(v) = $v { c.$f = Some(v); } )* };
    }
    over!(t_lo <- a.t_lo.clone(), t_hi <- a.t_hi.clone(), bisect_width <- a.width.clone(),
          n <- a.n, m <- a.m, precision <- a.precision, partition <- a.partition,
          cache_dir <- a.cache_dir.clone(), threads <- threads);
    Ok(c)
}

fn pipeline_options(c: &JobConfig, escalate: bool) -> Result<PipelineOptions> {
    Ok(PipelineOptions {
        n: c.n,
        m: c.m(),
        precision: c.precision(),
        partition: c.partition(),
        escalate,
        cache: match &c.cache_dir {
            Some(d) => Some(Cache::open(d)?),
            None => None,
        },
        ..Default::default()
    })
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new().num_threads(k).build()?.install(f)),
        None => Ok(f()),
    }
}

fn prepared(c: &JobConfig, opts: &PipelineOptions) -> Result<Prepared> {
    let f = c.forbidden_set()?;
    with_threads(c.threads, || prepare(&f, opts))?.context("building the reduced matrix")
}

fn stats_json(c: &JobConfig, p: &Prepared) -> Value {
    json!({
        "set": c.set_name(),
        "forbidden_words": p.forbidden.len(),
        "max_word_length": p.forbidden.max_len(),
        "n": p.allowed.n,
        "allowed_words": p.num_allowed(),
        "k": p.markov.k,
        "k_rows": p.markov.k_rows,
        "essential_classes": p.markov.essential.len(),
        "suffix_bound": p.forbidden.distinct_suffixes() + 1,
        "irreducible": p.markov.irreducible,
        "provenance": p.markov.provenance,
    })
}

pub fn matrix_stats(c: &JobConfig) -> Result<Outcome> {
    let opts = pipeline_options(c, true)?;
    let p = prepared(c, &opts)?;
    let mut warnings = Vec::new();
    if !p.markov.irreducible {
        warnings.push(format!(
            "class graph not strongly connected; {} of {} column classes are essential",
            p.markov.essential.len(),
            p.markov.k
        ));
    }
    let mut text = String::new();
    writeln!(
        text,
        "{}: |F|={} n={} #A={} K={} (rows {}, essential {}, bound S+1={})",
        c.set_name(),
        p.forbidden.len(),
        p.allowed.n,
        p.num_allowed(),
        p.markov.k,
        p.markov.k_rows,
        p.markov.essential.len(),
        p.forbidden.distinct_suffixes() + 1
    )?;
    for w in &warnings {
        writeln!(text, "warning: {w}")?;
    }
    let mut j = stats_json(c, &p);
    j["command"] = json!("matrix-stats");
    j["input_hash"] = json!(input_hash(c));
    j["timings"] = json!(p.timings);
    j["cache_hits"] = json!(p.cache_hits);
    j["warnings"] = json!(warnings);
    j["versions"] = versions();
    Ok(Outcome {
        text,
        json: j,
        status: Status3::Passed,
    })
}

fn run_line(r: &PointRun) -> String {
    let c = &r.certificate;
    let dir = match c.direction {
        Direction::Lower => "LOWER",
        Direction::Upper => "UPPER",
        Direction::Undecided => "UNDECIDED",
    };
    format!(
        "t={} {dir} ratio in [{}, {}]  eigenvalue {:.10}  P={} bits={} ({:.1} s)",
        c.t, c.ratio_lo, c.ratio_hi, r.eigen.eigenvalue, c.partition_count, c.precision_bits, c.elapsed_secs
    )
}

pub fn dim(c: &JobConfig, a: &JobArgs, allow_bisect: bool) -> Result<Outcome> {
    let bracket = c.t_lo.is_some() || c.t_hi.is_some();
    if c.t.is_empty() && !bracket {
        bail!("no t values: give --t or a bracket --t-lo/--t-hi");
    }
    if bracket && !allow_bisect {
        bail!("certify takes explicit --t values; use dim for a bracket");
    }
    let opts = pipeline_options(c, !a.no_escalate)?;
    let clock = Instant::now();
    let p = prepared(c, &opts)?;
    if a.eigen_only {
        return eigen_only(c, &p, &opts);
    }
    let cost = p.num_allowed() as f64 * opts.partition as f64 * p.markov.k as f64;
    if cost > LONG_RUN_COST && !a.allow_long {
        bail!(
            "estimated certification cost #A·P·K = {cost:.2e} exceeds {LONG_RUN_COST:.0e}; pass --allow-long to run anyway"
        );
    }
    let mut runs = Vec::new();
    let mut bisection = None;
    if !c.t.is_empty() {
        for t in &c.t {
            let tq = parse_rational(t).with_context(|| format!("t value {t:?}"))?;
            let r = with_threads(c.threads, || run_at(&p, &tq, &opts))?
                .with_context(|| format!("certifying at t={t}"))?;
            runs.push(r);
        }
    }
    if bracket {
        let (Some(lo), Some(hi)) = (&c.t_lo, &c.t_hi) else {
            bail!("a bracket needs both t_lo and t_hi");
        };
        let width = parse_rational(c.bisect_width.as_deref().unwrap_or("0.000001"))?;
        let (lo, hi) = (parse_rational(lo)?, parse_rational(hi)?);
        let steps = c.bisect_steps.unwrap_or(60);
        let b = with_threads(c.threads, || bisect_dimension(&p, &lo, &hi, steps, &width, &opts))?
            .context("bisection")?;
        runs.extend(b.runs.iter().cloned());
        bisection = Some(b);
    }

    let mut text = String::new();
    writeln!(text, "{}: #A={} K={} essential={}", c.set_name(), p.num_allowed(), p.markov.k, p.markov.essential.len())?;
    let mut warnings = Vec::new();
    for r in &runs {
        writeln!(text, "{}", run_line(r))?;
        for e in &r.certificate.escalations {
            writeln!(text, "  escalation: {e}")?;
        }
        for w in &r.warnings {
            warnings.push(format!("t={}: {w}", r.certificate.t));
        }
    }
    let best_lower = runs
        .iter()
        .filter(|r| r.certificate.direction == Direction::Lower)
        .map(|r| &r.certificate.t)
        .max_by(|x, y| parse_rational(x).unwrap().cmp(&parse_rational(y).unwrap()));
    let best_upper = runs
        .iter()
        .filter(|r| r.certificate.direction == Direction::Upper)
        .map(|r| &r.certificate.t)
        .min_by(|x, y| parse_rational(x).unwrap().cmp(&parse_rational(y).unwrap()));
    if let (Some(l), Some(u)) = (best_lower, best_upper) {
        if parse_rational(l)? > parse_rational(u)? {
            bail!("inconsistent certificates: LOWER at {l} above UPPER at {u}");
        }
    }
    match (best_lower, best_upper) {
        (Some(l), Some(u)) => writeln!(text, "certified: {l} <= dim <= {u}")?,
        (Some(l), None) => writeln!(text, "certified: dim >= {l}")?,
        (None, Some(u)) => writeln!(text, "certified: dim <= {u}")?,
        (None, None) => writeln!(text, "no certificate")?,
    }
    for w in &warnings {
        writeln!(text, "warning: {w}")?;
    }
    let undecided = runs.iter().any(|r| r.certificate.direction == Direction::Undecided);
    let mut j = stats_json(c, &p);
    j["command"] = json!(if allow_bisect { "dim" } else { "certify" });
    j["input_hash"] = json!(input_hash(c));
    j["runs"] = serde_json::to_value(&runs)?;
    j["lower"] = json!(best_lower);
    j["upper"] = json!(best_upper);
    j["bisection"] = json!(bisection.is_some());
    j["warnings"] = json!(warnings);
    j["timings"] = json!(p.timings);
    j["elapsed_secs"] = json!(clock.elapsed().as_secs_f64());
    j["versions"] = versions();
    Ok(Outcome {
        text,
        json: j,
        status: if undecided { Status3::Undecided } else { Status3::Passed },
    })
}

fn eigen_only(c: &JobConfig, p: &Prepared, opts: &PipelineOptions) -> Result<Outcome> {
    if c.t.is_empty() {
        bail!("--eigen-only needs explicit --t values");
    }
    let mut text = String::new();
    writeln!(text, "{}: #A={} K={} essential={}", c.set_name(), p.num_allowed(), p.markov.k, p.markov.essential.len())?;
    let mut out = Vec::new();
    for t in &c.t {
        let tq = parse_rational(t).with_context(|| format!("t value {t:?}"))?;
        let clock = Instant::now();
        let sp = with_threads(c.threads, || spectral_at(p, &tq, opts))?
            .with_context(|| format!("eigenvalue at t={t}"))?;
        writeln!(
            text,
            "t={t} eigenvalue {:.10} (Collatz bounds [{:.12}, {:.12}], {} iterations, {:.1} s; not a certificate)",
            sp.summary.eigenvalue,
            sp.summary.lambda_lo,
            sp.summary.lambda_hi,
            sp.summary.iterations,
            clock.elapsed().as_secs_f64()
        )?;
        out.push(sp.summary);
    }
    let mut j = stats_json(c, p);
    j["command"] = json!("dim --eigen-only");
    j["input_hash"] = json!(input_hash(c));
    j["eigen"] = serde_json::to_value(&out)?;
    j["rigorous"] = json!(false);
    j["versions"] = versions();
    Ok(Outcome {
        text,
        json: j,
        status: Status3::Passed,
    })
}

pub fn search(a: &SearchArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.script)
        .with_context(|| format!("reading script {}", a.script.display()))?;
    let script: SearchScript =
        toml::from_str(&text).with_context(|| format!("in script {}", a.script.display()))?;
    let r = script.run()?;
    let mut out = String::new();
    writeln!(out, "seed {} threshold {} policy {}", script.seed, script.threshold, script.policy)?;
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    for n in &r.tree {
        *counts.entry(n.status.letter()).or_default() += 1;
        writeln!(
            out,
            "  {:<30} [{:.10}, {:.10}] {}{}",
            n.pointed.to_string(),
            n.interval.lo_f64(),
            n.interval.hi_f64(),
            n.status.letter(),
            if n.pruned { " (contains an excluded word)" } else { "" }
        )?;
    }
    writeln!(out, "nodes {} {:?}", r.tree.len(), counts)?;
    let words: Vec<String> = r.forbidden.iter().map(|w| w.to_string()).collect();
    writeln!(out, "forbidden ({}): {}", words.len(), words.join(" "))?;
    let s = r.upper_candidate.as_ref().map(|b| b.hi_string(12));
    if let Some(s) = &s {
        writeln!(out, "upper candidate S <= {s}")?;
    }
    if r.budget_exhausted {
        writeln!(out, "warning: node budget exhausted; result is partial")?;
    }
    if let Some(path) = &a.out {
        let mut file = format!(
            "# forbidden words from seed {} at threshold {}\n",
            script.seed, script.threshold
        );
        for w in &words {
            writeln!(file, "{w}")?;
        }
        std::fs::write(path, file).with_context(|| format!("writing {}", path.display()))?;
    }
    let tree: Vec<Value> = r
        .tree
        .iter()
        .map(|n| {
            json!({
                "pointed": n.pointed.to_string(),
                "lo": n.interval.lo_string(15),
                "hi": n.interval.hi_string(15),
                "status": n.status.letter().to_string(),
                "pruned": n.pruned,
            })
        })
        .collect();
    Ok(Outcome {
        text: out,
        json: json!({
            "command": "search",
            "input_hash": input_hash(&text),
            "seed": script.seed,
            "threshold": script.threshold,
            "policy": script.policy,
            "forbidden": words,
            "upper_candidate": s,
            "budget_exhausted": r.budget_exhausted,
            "tree": tree,
            "versions": versions(),
        }),
        status: if r.budget_exhausted { Status3::Undecided } else { Status3::Passed },
    })
}

pub fn verify_tables(a: &FixtureArgs) -> Result<Outcome> {
    let rows = match &a.fixture {
        Some(p) => parse_tables(
            &std::fs::read_to_string(p).with_context(|| format!("reading fixture {}", p.display()))?,
        )
        .with_context(|| format!("in fixture {}", p.display()))?,
        None => builtin_tables(),
    };
    let mut text = String::new();
    let mut outcomes = Vec::new();
    let mut failed = 0;
    for r in &rows {
        let o = r.check()?;
        let note = match (o.passed, r.action == Status::Exclude) {
            (false, _) => "FAIL",
            (true, _) if o.endpoint_tie => "pass (endpoint tie)",
            _ => "pass",
        };
        writeln!(
            text,
            "line {:>3} table {} {:>5} {:<28} printed [{}, {}] J in [{:.10}, {:.10}] {note}",
            o.line_no, o.table, o.vertex, o.pointed, o.claimed.0, o.claimed.1, o.j_lo, o.j_hi
        )?;
        if !o.passed {
            failed += 1;
        }
        outcomes.push(o);
    }
    writeln!(text, "{} rows, {} failed", rows.len(), failed)?;
    Ok(Outcome {
        text,
        json: json!({ "command": "verify-tables", "rows": outcomes, "failed": failed, "versions": versions() }),
        status: if failed == 0 { Status3::Passed } else { Status3::Failed },
    })
}

pub fn gap_check(a: &FixtureArgs) -> Result<Outcome> {
    let lines = match &a.fixture {
        Some(p) => load_fixture(p).with_context(|| format!("in fixture {}", p.display()))?,
        None => builtin_fixture(),
    };
    let mut text = String::new();
    let mut outcomes = Vec::new();
    let mut failed = 0;
    for l in &lines {
        let o = l.evaluate()?;
        writeln!(
            text,
            "line {:>3} s={:<10} sum in [{:.9}, {:.9}] < {} {} ({})",
            o.line_no,
            o.s,
            o.sum_lo,
            o.sum_hi,
            o.claim,
            if o.passed { "pass" } else { "FAIL" },
            o.anchor
        )?;
        if !o.passed {
            failed += 1;
        }
        outcomes.push(o);
    }
    let disc = fixture_discrepancies(&lines)?;
    for d in &disc {
        writeln!(
            text,
            "warning: constant {} for {} is below the supremum of {} in [{:.8}, {:.8}]",
            d.constant, d.word, d.ratio, d.sup_lo, d.sup_hi
        )?;
    }
    writeln!(text, "{} lines, {} failed", lines.len(), failed)?;
    let disc_json: Vec<Value> = disc
        .iter()
        .map(|d| json!({ "word": d.word, "constant": d.constant, "sup_lo": d.sup_lo, "sup_hi": d.sup_hi }))
        .collect();
    Ok(Outcome {
        text,
        json: json!({
            "command": "gap-check",
            "lines": outcomes,
            "failed": failed,
            "constant_discrepancies": disc_json,
            "versions": versions(),
        }),
        status: if failed == 0 { Status3::Passed } else { Status3::Failed },
    })
}

/// Threshold parsing shared with scripts: exact rational from a decimal.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    Ok(parse_rational(s)?)
}
