//! End-to-end driver: allowed words → reduced matrix → collocation matrix →
//! eigenvector → test functions → certificate, and bisection over `t`.

use std::time::Instant;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::cache::Cache;
use crate::certify::{certify, lift_eigvec, rational_decimal, CertifyOptions, DimensionCertificate, Direction};
use crate::error::{Error, Result};
use crate::subshift::{allowed_words_with, reduced_markov_from, AllowedWords, ForbiddenSet, ReducedMarkov};
use crate::transfer::{assemble_reduced_bt, chebyshev_basis, leading_eig, CollocationBasis, EigenPair, ReducedBt};

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Block length; `None` picks `max |f| − 1` (or 1 for the empty set).
    pub n: Option<usize>,
    /// Collocation nodes per class.
    pub m: usize,
    /// Certification precision in bits; 53 uses `f64` endpoints.
    pub precision: u32,
    pub partition: usize,
    pub escalate: bool,
    pub eig_tol: f64,
    pub max_iters: usize,
    pub cache: Option<Cache>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            n: None,
            m: 8,
            precision: 53,
            partition: 256,
            escalate: true,
            eig_tol: 1e-13,
            max_iters: 200_000,
            cache: None,
        }
    }
}

/// Combinatorial data shared by every `t`.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub forbidden: ForbiddenSet,
    pub allowed: AllowedWords,
    pub markov: ReducedMarkov,
    pub timings: Vec<(String, f64)>,
    pub cache_hits: Vec<String>,
}

impl Prepared {
    pub fn num_allowed(&self) -> usize {
        self.allowed.len()
    }

    pub fn k(&self) -> usize {
        self.markov.k
    }
}

pub fn default_block_length(f: &ForbiddenSet) -> usize {
    if f.is_empty() {
        1
    } else {
        f.default_n()
    }
}

pub fn prepare(f: &ForbiddenSet, opts: &PipelineOptions) -> Result<Prepared> {
    let n = opts.n.unwrap_or_else(|| default_block_length(f));
    let key = f.hash_with(n);
    let mut timings = Vec::new();
    let mut cache_hits = Vec::new();

    let clock = Instant::now();
    let cached = opts.cache.as_ref().and_then(|c| c.load_allowed(&key));
    let allowed = match cached {
        Some(a) => {
            cache_hits.push("allowed".to_string());
            a
        }
        None => {
            let a = allowed_words_with(f, n, opts.n.is_some())?;
            if let Some(c) = &opts.cache {
                c.store_allowed(&a)?;
            }
            a
        }
    };
    if allowed.is_empty() {
        return Err(Error::EmptySubshift(n));
    }
    timings.push(("allowed_words".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let cached = opts.cache.as_ref().and_then(|c| c.load_markov(&key));
    let markov = match cached {
        Some(rm) if rm.row_map.len() == allowed.len() => {
            cache_hits.push("markov".to_string());
            rm
        }
        _ => {
            let rm = reduced_markov_from(f, &allowed)?;
            if let Some(c) = &opts.cache {
                c.store_markov(&rm)?;
            }
            rm
        }
    };
    timings.push(("reduced_markov".to_string(), clock.elapsed().as_secs_f64()));
    Ok(Prepared {
        forbidden: f.clone(),
        allowed,
        markov,
        timings,
        cache_hits,
    })
}

/// Power-iteration metadata.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub t: String,
    pub m: usize,
    pub classes: usize,
    pub eigenvalue: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub residual: f64,
    pub iterations: usize,
    pub start_vector: &'static str,
    pub normalization: &'static str,
}

/// Collocation matrix on the essential classes and its leading eigenpair.
pub struct Spectral {
    pub basis: CollocationBasis<f64>,
    pub bt: ReducedBt<f64>,
    pub pair: EigenPair<f64>,
    pub summary: EigenSummary,
}

pub fn spectral_at(prep: &Prepared, t: &Rational, opts: &PipelineOptions) -> Result<Spectral> {
    let basis = chebyshev_basis::<f64>(opts.m)?;
    let tf = t.to_f64();
    let full_key = format!("{}:m{}", prep.markov.provenance, opts.m);
    let full = match opts.cache.as_ref().and_then(|c| c.load_bt(&full_key, tf)) {
        Some(bt) => bt,
        None => {
            let bt = assemble_reduced_bt(&prep.markov, &prep.allowed, &basis, tf)?;
            if let Some(c) = &opts.cache {
                c.store_bt(&bt)?;
            }
            bt
        }
    };
    let bt = full.restrict(&prep.markov.essential)?;
    let pair = leading_eig(&bt, opts.eig_tol, opts.max_iters)?;
    let summary = EigenSummary {
        t: rational_decimal(t),
        m: opts.m,
        classes: bt.k(),
        eigenvalue: pair.eigenvalue,
        lambda_lo: pair.lambda_lo,
        lambda_hi: pair.lambda_hi,
        residual: pair.residual,
        iterations: pair.iterations,
        start_vector: "all-ones",
        normalization: "sup-norm",
    };
    Ok(Spectral {
        basis,
        bt,
        pair,
        summary,
    })
}

/// One full pipeline run at a single `t`.
#[derive(Clone, Debug, Serialize)]
pub struct PointRun {
    pub eigen: EigenSummary,
    pub certificate: DimensionCertificate,
    pub warnings: Vec<String>,
    pub timings: Vec<(String, f64)>,
}

pub fn run_at(prep: &Prepared, t: &Rational, opts: &PipelineOptions) -> Result<PointRun> {
    let clock = Instant::now();
    let sp = spectral_at(prep, t, opts)?;
    let mut timings = vec![("eigen".to_string(), clock.elapsed().as_secs_f64())];
    let clock = Instant::now();
    let tf = lift_eigvec(&sp.pair, &sp.basis, &sp.bt)?;
    let copts = CertifyOptions {
        partition: opts.partition,
        precision: opts.precision,
        escalate: opts.escalate,
    };
    let certificate = certify(&tf, t, &prep.markov, &prep.allowed, &copts)?;
    timings.push(("certify".to_string(), clock.elapsed().as_secs_f64()));
    let mut warnings = Vec::new();
    let slack = 10.0 * sp.pair.residual.max(f64::EPSILON);
    let (lo, hi) = certificate.ratio;
    if sp.pair.eigenvalue < lo - slack || sp.pair.eigenvalue > hi + slack {
        warnings.push(format!(
            "eigenvalue estimate {:.12} outside ratio enclosure [{lo:.12}, {hi:.12}]",
            sp.pair.eigenvalue
        ));
    }
    Ok(PointRun {
        eigen: sp.summary,
        certificate,
        warnings,
        timings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Bisection {
    pub lower: Option<PointRun>,
    pub upper: Option<PointRun>,
    pub runs: Vec<PointRun>,
}

impl Bisection {
    /// `(t_lo, t_hi)` of the certified bracket, if both sides were found.
    pub fn bracket(&self) -> Option<(Rational, Rational)> {
        let p = |r: &PointRun| crate::ball::parse_rational(&r.certificate.t).ok();
        Some((p(self.lower.as_ref()?)?, p(self.upper.as_ref()?)?))
    }
}

/// Shortest decimal in `[a, b]`.
pub fn short_decimal_between(a: &Rational, b: &Rational) -> Rational {
    let mut scale = Integer::from(1);
    loop {
        let c = Rational::from(a * &scale).ceil();
        let q = c / &scale;
        if &q <= b {
            return q;
        }
        scale *= 10;
    }
}

/// Bisect on `[t_lo, t_hi]` until the bracket is at most `width` wide or
/// `max_steps` runs were made. Midpoints are the shortest decimals in the
/// middle half of the current bracket. Only certified outcomes move the
/// bracket; an UNDECIDED run stops the search.
pub fn bisect_dimension(
    prep: &Prepared,
    t_lo: &Rational,
    t_hi: &Rational,
    max_steps: usize,
    width: &Rational,
    opts: &PipelineOptions,
) -> Result<Bisection> {
    let (zero, one) = (Rational::new(), Rational::from(1));
    if !(t_lo < t_hi && *t_lo > zero && *t_hi < one) {
        return Err(Error::Invalid("need 0 < t_lo < t_hi < 1".into()));
    }
    let (mut lo, mut hi) = (t_lo.clone(), t_hi.clone());
    let mut out = Bisection {
        lower: None,
        upper: None,
        runs: Vec::new(),
    };
    let mut undecided = Vec::new();
    for _ in 0..max_steps {
        if Rational::from(&hi - &lo) <= *width {
            break;
        }
        let quarter = Rational::from(&hi - &lo) / 4;
        let mid = short_decimal_between(&Rational::from(&lo + &quarter), &Rational::from(&hi - &quarter));
        let run = run_at(prep, &mid, opts)?;
        log::info!(
            "t={} {:?} [{}, {}]",
            run.certificate.t,
            run.certificate.direction,
            run.certificate.ratio_lo,
            run.certificate.ratio_hi
        );
        out.runs.push(run.clone());
        match run.certificate.direction {
            Direction::Lower => {
                lo = mid;
                out.lower = Some(run);
            }
            Direction::Upper => {
                hi = mid;
                out.upper = Some(run);
            }
            Direction::Undecided => {
                undecided.push(format!(
                    "t={} ratio [{}, {}]",
                    run.certificate.t, run.certificate.ratio_lo, run.certificate.ratio_hi
                ));
                break;
            }
        }
    }
    if out.lower.is_none() && out.upper.is_none() {
        return Err(Error::Invalid(format!(
            "no certificate obtained; undecided: {}",
            if undecided.is_empty() { "none".to_string() } else { undecided.join("; ") }
        )));
    }
    if let Some((a, b)) = out.bracket() {
        if a > b {
            return Err(Error::Invalid(format!(
                "inconsistent certificates: LOWER at {} above UPPER at {}",
                rational_decimal(&a),
                rational_decimal(&b)
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_decimals() {
        let q = |s: &str| crate::ball::parse_rational(s).unwrap();
        assert_eq!(short_decimal_between(&q("0.525"), &q("0.575")), q("0.53"));
        assert_eq!(short_decimal_between(&q("0.53127"), &q("0.531289")), q("0.53127"));
        assert_eq!(short_decimal_between(&q("0.2"), &q("0.7")), q("0.2"));
    }
}
