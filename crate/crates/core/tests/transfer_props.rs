use cfdim_core::ball::parse_rational;
use cfdim_core::pipeline::{prepare, spectral_at, PipelineOptions};
use cfdim_core::sets::builtin;
use cfdim_core::subshift::{allowed_words, compatible, reduced_markov_from, ForbiddenSet};
use cfdim_core::transfer::{assemble_reduced_bt, block, chebyshev_basis};
use cfdim_core::Word;
use proptest::prelude::*;

fn small_set() -> impl Strategy<Value = Option<ForbiddenSet>> {
    prop::collection::vec(prop::collection::vec(1u8..=2, 2..=4), 1..=3).prop_map(|ws| {
        let words: Vec<Word> = ws.into_iter().map(Word).collect();
        ForbiddenSet::new(2, &words, true).ok()
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn full_operator_preserves_class_structure(
        f in small_set(),
        extra in 0usize..=1,
        t in 0.05f64..0.95,
        seed in prop::collection::vec(0.01f64..1.0, 256 * 3),
    ) {
        let f = f.unwrap();
        let n = (f.default_n() + extra).min(4);
        let a = allowed_words(&f, n).unwrap();
        prop_assume!(!a.is_empty());
        let rm = reduced_markov_from(&f, &a).unwrap();
        let m = 3;
        let basis = chebyshev_basis::<f64>(m).unwrap();
        let words: Vec<Word> = (0..a.len()).map(|i| a.word(i)).collect();
        let blocks: Vec<Vec<f64>> = words.iter().map(|w| block(w.digits(), t, &basis)).collect();
        // full operator: ((w,i),(s,j)) = [s may precede w] B^s(i,j)
        let apply = |v: &[f64]| -> Vec<f64> {
            let mut u = vec![0.0; words.len() * m];
            for (wi, w) in words.iter().enumerate() {
                for (si, s) in words.iter().enumerate() {
                    if !compatible(s, w, &f) {
                        continue;
                    }
                    for i in 0..m {
                        for j in 0..m {
                            u[wi * m + i] += blocks[si][i * m + j] * v[si * m + j];
                        }
                    }
                }
            }
            u
        };
        let v: Vec<f64> = seed.iter().cycle().take(words.len() * m).copied().collect();
        let u = apply(&v);
        for a1 in 0..words.len() {
            for a2 in 0..words.len() {
                if rm.col_map[a1] == rm.col_map[a2] {
                    for i in 0..m {
                        prop_assert!(close(u[a1 * m + i], u[a2 * m + i]));
                    }
                }
            }
        }
        // lifted vectors: B lift(v) = lift(B̂ v)
        let bt = assemble_reduced_bt(&rm, &a, &basis, t).unwrap();
        let vh: Vec<f64> = seed.iter().take(bt.dim()).copied().collect();
        let lift = |x: &[f64]| -> Vec<f64> {
            (0..words.len())
                .flat_map(|w| {
                    let c = rm.col_map[w] as usize;
                    x[c * m..c * m + m].to_vec()
                })
                .collect()
        };
        let lhs = apply(&lift(&vh));
        let rhs = lift(&bt.mul_vec(&vh));
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!(close(*x, *y), "{} vs {}", x, y);
        }
    }
}

#[test]
fn eigenvalue_decreases_in_t() {
    for name in ["E2", "B1"] {
        let f = builtin(name).unwrap();
        let opts = PipelineOptions::default();
        let prep = prepare(&f, &opts).unwrap();
        let lams: Vec<f64> = ["0.4", "0.5", "0.6"]
            .iter()
            .map(|t| {
                let sp = spectral_at(&prep, &parse_rational(t).unwrap(), &opts).unwrap();
                assert!(sp.pair.vector.iter().all(|&x| x > 0.0));
                assert!(sp.pair.lambda_lo <= sp.pair.lambda_hi);
                sp.pair.eigenvalue
            })
            .collect();
        assert!(lams[0] > lams[1] && lams[1] > lams[2], "{name}: {lams:?}");
    }
}

#[test]
fn b1_eigenvalue_at_half() {
    let opts = PipelineOptions::default();
    let prep = prepare(&builtin("B1").unwrap(), &opts).unwrap();
    let sp = spectral_at(&prep, &parse_rational("0.5").unwrap(), &opts).unwrap();
    assert_eq!(prep.k(), 138);
    assert_eq!(sp.bt.k(), 137);
    assert!((sp.pair.eigenvalue - 1.0004258).abs() < 1e-6, "{}", sp.pair.eigenvalue);
}
