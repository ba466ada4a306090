use cfdim_core::cf::j_interval;
use cfdim_core::{BallMp, Mp, PointedWord, Word};
use proptest::prelude::*;

fn j(p: &PointedWord) -> BallMp {
    j_interval::<Mp>(p, 128).unwrap()
}

fn pointed_word() -> impl Strategy<Value = PointedWord> {
    prop::collection::vec(1u8..=2, 1..14).prop_flat_map(|d| {
        let n = d.len();
        (Just(d), 0..n).prop_map(|(d, k)| PointedWord::new(Word(d), k).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn j_reversal_and_nesting(p in pointed_word(), d in 1u8..=2, left in any::<bool>()) {
        let jp = j(&p);
        let jr = j(&p.reversed());
        prop_assert!(jp.intersect(&jr).is_some());
        prop_assert!((jp.lo_f64() - jr.lo_f64()).abs() < 1e-15);
        prop_assert!((jp.hi_f64() - jr.hi_f64()).abs() < 1e-15);
        let child = if left { p.push_left(d) } else { p.push_right(d) };
        let jc = j(&child);
        // child endpoints are enclosed by the parent's outer bounds
        prop_assert!(jc.lo >= jp.lo || jc.intersect(&BallMp::new(jp.lo.clone(), jp.lo.clone())).is_some());
        prop_assert!(jc.hi <= jp.hi || jc.intersect(&BallMp::new(jp.hi.clone(), jp.hi.clone())).is_some());
        prop_assert!(jc.width_f64() <= jp.width_f64() + 1e-30);
    }
}
