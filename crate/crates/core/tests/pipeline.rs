use cfdim_core::ball::parse_rational;
use cfdim_core::cache::Cache;
use cfdim_core::certify::Direction;
use cfdim_core::pipeline::*;
use cfdim_core::sets::builtin;
use cfdim_core::subshift::ForbiddenSet;
use cfdim_core::transfer::{assemble_reduced_bt, chebyshev_basis};

fn q(s: &str) -> rug::Rational {
    parse_rational(s).unwrap()
}

fn e2() -> Prepared {
    let opts = PipelineOptions {
        n: Some(1),
        ..Default::default()
    };
    prepare(&builtin("E2").unwrap(), &opts).unwrap()
}

#[test]
fn e2_lower_at_053128() {
    let prep = e2();
    assert_eq!(prep.num_allowed(), 2);
    let run = run_at(&prep, &q("0.53128"), &PipelineOptions::default()).unwrap();
    println!("{:?} [{}, {}]", run.certificate.direction, run.certificate.ratio_lo, run.certificate.ratio_hi);
    assert_eq!(run.certificate.direction, Direction::Lower);
    assert!(run.warnings.is_empty(), "{:?}", run.warnings);
}

#[test]
fn e2_bisection_bracket() {
    let prep = e2();
    let b = bisect_dimension(&prep, &q("0.5"), &q("0.6"), 60, &q("0.000001"), &PipelineOptions::default()).unwrap();
    let (lo, hi) = b.bracket().unwrap();
    println!("{} < dim E2 < {} after {} runs", lo.to_f64(), hi.to_f64(), b.runs.len());
    assert!(lo < hi);
    assert!(rug::Rational::from(&hi - &lo) <= q("0.000001"));
    // consistent with the certified LOWER at 0.53128
    assert!(hi > q("0.53128"));
    assert_eq!(b.lower.unwrap().certificate.direction, Direction::Lower);
    assert_eq!(b.upper.unwrap().certificate.direction, Direction::Upper);
}

#[test]
fn bisection_rejects_bad_bracket() {
    let prep = e2();
    let o = PipelineOptions::default();
    assert!(bisect_dimension(&prep, &q("0.6"), &q("0.5"), 5, &q("0.01"), &o).is_err());
    assert!(bisect_dimension(&prep, &q("0"), &q("0.5"), 5, &q("0.01"), &o).is_err());
}

#[test]
fn cache_reload_is_identical() {
    let dir = std::env::temp_dir().join(format!("cfdim-cache-test-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let f = ForbiddenSet::new(2, &["1212".parse().unwrap(), "2221".parse().unwrap()], true).unwrap();
    let opts = PipelineOptions {
        cache: Some(Cache::open(&dir).unwrap()),
        ..Default::default()
    };
    let fresh = prepare(&f, &opts).unwrap();
    assert!(fresh.cache_hits.is_empty());
    let again = prepare(&f, &opts).unwrap();
    assert_eq!(again.cache_hits, vec!["allowed", "markov"]);
    assert_eq!(again.allowed, fresh.allowed);
    assert_eq!(again.markov, fresh.markov);

    let s1 = spectral_at(&fresh, &q("0.4"), &opts).unwrap();
    let cache = opts.cache.as_ref().unwrap();
    let key = format!("{}:m{}", fresh.markov.provenance, opts.m);
    let t = s1.bt.t;
    let stored = cache.load_bt(&key, t).unwrap();
    let basis = chebyshev_basis::<f64>(opts.m).unwrap();
    let direct = assemble_reduced_bt(&fresh.markov, &fresh.allowed, &basis, t).unwrap();
    assert!(stored.matrix.iter().zip(&direct.matrix).all(|(a, b)| a.to_bits() == b.to_bits()));
    let s2 = spectral_at(&fresh, &q("0.4"), &opts).unwrap();
    assert_eq!(s1.pair.eigenvalue.to_bits(), s2.pair.eigenvalue.to_bits());

    // a corrupted file is a miss, then rewritten
    let path = cache.path_for("markov", &fresh.markov.provenance);
    let mut bytes = std::fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    std::fs::write(&path, bytes).unwrap();
    let third = prepare(&f, &opts).unwrap();
    assert_eq!(third.cache_hits, vec!["allowed"]);
    assert_eq!(third.markov, fresh.markov);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn refinement_does_not_widen() {
    let f = ForbiddenSet::new(2, &["121".parse().unwrap(), "2222".parse().unwrap()], true).unwrap();
    let prep = prepare(&f, &PipelineOptions::default()).unwrap();
    let run = |p: usize| {
        let o = PipelineOptions {
            partition: p,
            escalate: false,
            ..Default::default()
        };
        run_at(&prep, &q("0.3"), &o).unwrap().certificate.ratio
    };
    let (a, b) = (run(64), run(256));
    println!("P=64 [{}, {}]  P=256 [{}, {}]", a.0, a.1, b.0, b.1);
    let slack = 1e-12;
    assert!(b.1 - b.0 <= a.1 - a.0 + slack);
    assert!(b.0 >= a.0 - slack && b.1 <= a.1 + slack);
}
