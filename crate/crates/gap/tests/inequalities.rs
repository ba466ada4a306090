use cfdim_core::cf::{continuants, cylinder_length};
use cfdim_core::{BallMp, Word};
use cfdim_gap::fixture::{builtin_fixture, fixture_discrepancies};
use cfdim_gap::*;
use proptest::prelude::*;
use rug::{Integer, Rational};

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

#[test]
fn every_fixture_line_certified() {
    let lines = builtin_fixture();
    assert!(lines.len() >= 40);
    let mut failed = Vec::new();
    for l in &lines {
        let o = l.evaluate().unwrap();
        println!(
            "line {:>3} s={:<9} sum in [{:.9}, {:.9}] < {:<7} {} ({})",
            o.line_no,
            o.s,
            o.sum_lo,
            o.sum_hi,
            o.claim,
            if o.certified { "certified" } else { "NOT certified" },
            o.anchor
        );
        if !o.passed {
            failed.push(o.line_no);
        }
    }
    assert!(failed.is_empty(), "failed lines {failed:?}");
}

#[test]
fn constant_discrepancy_report() {
    let d = fixture_discrepancies(&builtin_fixture()).unwrap();
    for x in &d {
        println!(
            "constant {} for word {} is below sup {} in [{:.8}, {:.8}]",
            x.constant, x.word, x.ratio, x.sup_lo, x.sup_hi
        );
    }
    // The 0.00254 bound on the ratio of 231 is below its value 1/144 at r = 0.
    assert!(d.iter().any(|x| x.word == "231" && x.constant == "0.00254"));
    assert!(d.iter().all(|x| x.constant != "0.0071"));
}

#[test]
fn displayed_r_dependent_examples() {
    let g = verify_gap(&[w("2131"), w("331312")], "0.09").unwrap();
    assert!(g.certified);
    assert!(g.sup_hi < 0.985);
    let g = verify_gap(&[w("23131"), w("113131")], "0.09").unwrap();
    assert!(g.certified);
    assert!(g.sup_hi < 0.966);
}

#[test]
fn single_digit_one() {
    let g = verify_gap(&[w("1")], "1").unwrap();
    assert!(g.certified);
    assert!(g.sup_bound.contains_rational(&Rational::from((1, 2))));
    assert!(g.sup_hi - 0.5 < 1e-9);
}

#[test]
fn uncertified_when_sum_exceeds_one() {
    let g = verify_gap(&[w("1"), w("2")], "0.1").unwrap();
    assert!(!g.certified);
    assert!(g.sup_lo > 1.0);
}

#[test]
fn monotone_in_s() {
    let ws = [w("44"), w("3131213")];
    let mut prev = f64::INFINITY;
    for s in ["0.086", "0.09", "0.1", "0.2", "0.5"] {
        let g = verify_gap(&ws, s).unwrap();
        assert!(g.certified, "s={s}");
        assert!(g.sup_hi <= prev);
        prev = g.sup_hi;
    }
}

#[test]
fn nine_halves() {
    let (a, b) = nine_halves_identity(128).unwrap();
    let half9 = Rational::from((9, 2));
    for x in [&a, &b] {
        assert!(x.contains_rational(&half9));
        assert!(x.width_f64() < 1e-25);
    }
}

#[test]
fn witness_for_3_12() {
    let v = lambda0_3_12_witness(128).unwrap();
    let t = BallMp::from_rational(&Rational::from((396238, 100000)), 128);
    assert!(v.definitely_gt(&t), "{v}");
}

#[test]
fn constant_examples() {
    assert!(verify_gap_constants(&["0.00254", "1/63"], "0.153").unwrap());
    assert!(verify_gap_constants(&["2/3619", "0.0718"], "0.15").unwrap());
    assert!(!verify_gap_constants(&["0.9", "0.9"], "0.5").unwrap());
}

fn r_of(b: &[u8]) -> Rational {
    let (q, qp) = continuants(&Word(b.to_vec()));
    Rational::from((qp, q))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn ratio_matches_cylinder_oracle(
        b in prop::collection::vec(1u8..=4, 1..=10),
        tail in prop::collection::vec(1u8..=4, 1..=7),
    ) {
        let (bw, tw) = (Word(b.clone()), Word(tail.clone()));
        let exact = cylinder_length(&bw.concat(&tw)).unwrap() / cylinder_length(&bw).unwrap();
        let f = ratio_function(&tw).unwrap();
        prop_assert_eq!(f.eval_rational(&r_of(&b)), exact);
        prop_assert!(f.c1 > 0 && f.d1 > 0 && f.c2 > 0 && f.d2 > 0);
        prop_assert_eq!(Integer::from(&f.d2 - &f.d1) > 0, true);
    }
}
