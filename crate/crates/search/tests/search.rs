use cfdim_core::ball::parse_rational;
use cfdim_core::{BallMp, PointedWord, Word};
use cfdim_search::tables::builtin_tables;
use cfdim_search::*;
use proptest::prelude::*;

fn pw(s: &str) -> PointedWord {
    s.parse().unwrap()
}

const T1: &str = "3.334369";
const T2: &str = "3.334384009";

#[test]
fn printed_tables_contain_j() {
    let rows = builtin_tables();
    assert_eq!(rows.len(), 60);
    let mut failed = Vec::new();
    for r in &rows {
        let o = r.check().unwrap();
        println!(
            "table {} {:>5} {:<28} [{}, {}] J=[{:.10}, {:.10}] {}",
            o.table,
            o.vertex,
            o.pointed,
            o.claimed.0,
            o.claimed.1,
            o.j_lo,
            o.j_hi,
            if o.passed { "pass" } else { "FAIL" }
        );
        if !o.passed {
            failed.push(format!("{}:{}", o.table, o.vertex));
        }
    }
    // Vertex 14 prints an upper end below that of its own child fw10.
    assert_eq!(failed, vec!["1:14".to_string()]);
}

#[test]
fn vertex_14_contradicts_its_child() {
    let parent = pw("2211112*12112");
    let child = pw("2211112*1211221");
    let jp = cfdim_core::cf::j_interval::<cfdim_core::Mp>(&parent, 128).unwrap();
    let jc = cfdim_core::cf::j_interval::<cfdim_core::Mp>(&child, 128).unwrap();
    assert!(jp.contains(&jc));
    let printed_hi = BallMp::from_rational(&parse_rational("3.33426").unwrap(), 128);
    assert!(jc.definitely_gt(&printed_hi) || jc.hi > printed_hi.hi);
    assert!(verify_table_row(&child, "3.33441", "3.33472").unwrap().passed);
}

#[test]
fn negative_control() {
    assert!(verify_table_row(&pw("2112*12"), "3.2802", "3.3193").unwrap().passed);
    assert!(!verify_table_row(&pw("2112*12"), "3.29", "3.31").unwrap().passed);
    let bad = "1 | 3 | 2112*12 | 3.29 | 3.31 | A\n";
    let rows = parse_tables(bad).unwrap();
    assert!(!rows[0].check().unwrap().passed);
}

#[test]
fn excluded_word_refines_fw14() {
    let p = pw("211221112*12211");
    assert!(!verify_table_row(&p, "3.3343894", "3.3352").unwrap().passed);
    let given: Vec<Word> = vec!["21112121".parse().unwrap()];
    assert!(verify_table_row_given(&p, "3.3343894", "3.3352", &given).unwrap().passed);
}

#[test]
fn first_exclusion_is_21212() {
    let mut cfg = SearchConfig::new(T1).unwrap();
    cfg.max_nodes = 2000;
    let r = explore(&pw("2*"), &cfg).unwrap();
    assert!(!r.budget_exhausted);
    assert_eq!(r.forbidden[0].to_string(), "21212");
    let t = BallMp::from_rational(&cfg.threshold, 128);
    for n in r.tree.iter().filter(|n| n.status == Status::Exclude && !n.pruned) {
        assert!(n.interval.definitely_gt(&t));
    }
    let s = r.upper_candidate.unwrap();
    assert!(s.hi_f64() < 3.334369);
}

#[test]
fn low_threshold_excludes_root() {
    let cfg = SearchConfig::new("2.5").unwrap();
    let r = explore(&pw("2*"), &cfg).unwrap();
    assert_eq!(r.tree.len(), 1);
    assert_eq!(r.tree[0].status, Status::Exclude);
    assert_eq!(r.forbidden.len(), 1);
}

#[test]
fn high_threshold_abandons_root() {
    let cfg = SearchConfig::new("4").unwrap();
    let r = explore(&pw("2*"), &cfg).unwrap();
    assert_eq!(r.tree[0].status, Status::Abandon);
    assert!(r.forbidden.is_empty());
}

#[test]
fn budget_exhaustion_is_flagged() {
    let mut cfg = SearchConfig::new(T1).unwrap();
    cfg.max_nodes = 20;
    let r = explore(&pw("2*"), &cfg).unwrap();
    assert!(r.budget_exhausted);
    assert!(r.tree.len() <= 20);
}

#[test]
fn r1_refinement() {
    let script: SearchScript = SearchScript {
        seed: "222211112*12112221".into(),
        threshold: T2.into(),
        policy: "largest-gap".into(),
        max_nodes: 400,
        known_forbidden: cfdim_core::sets::builtin_words("B1")
            .unwrap()
            .iter()
            .map(|w| w.to_string())
            .collect(),
    };
    let r = script.run().unwrap();
    let f: Vec<String> = r.forbidden.iter().map(|w| w.to_string()).collect();
    // 1·R1·12 and 21·R1·111
    assert!(f.contains(&"12222111121211222112".to_string()));
    assert!(f.contains(&"2122221111212112221111".to_string()));
    // an extension of 121·R1·1
    assert!(f.iter().any(|w| w.contains("121222211112121122211")));
}

fn pointed_word() -> impl Strategy<Value = PointedWord> {
    prop::collection::vec(1u8..=2, 1..12).prop_flat_map(|d| {
        let n = d.len();
        (Just(d), 0..n).prop_map(|(d, k)| PointedWord::new(Word(d), k).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn classification_monotone_in_threshold(p in pointed_word(), a in 3.0f64..3.6, b in 3.0f64..3.6) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let q = |x: f64| parse_rational(&format!("{x:.6}")).unwrap();
        let s_lo = classify(&p, &q(lo), 128).unwrap().status;
        let s_hi = classify(&p, &q(hi), 128).unwrap().status;
        if s_lo == Status::Abandon {
            prop_assert_eq!(s_hi, Status::Abandon);
        }
        if s_hi == Status::Exclude {
            prop_assert_eq!(s_lo, Status::Exclude);
        }
    }
}
