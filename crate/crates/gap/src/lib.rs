//! Cylinder-ratio inequalities `Σ_w (|I(b,w)|/|I(b)|)^s < 1` used to bound the
//! dimension of the gap Cantor sets.
//!
//! For a prefix `b` with `r = q_{n-1}(b)/q_n(b)`, the ratio `|I(b,w)|/|I(b)|`
//! depends on `b` only through `r`, see [`RatioFunction`].

use rug::{Integer, Rational};
use serde::Serialize;

use cfdim_core::ball::parse_rational;
use cfdim_core::cf::{continuants, lambda0};
use cfdim_core::{BallMp, Error, Mp, PointedWord, Result, TailSpec, Word};

pub mod fixture;

pub use fixture::{parse_fixture, FixtureLine, LineOutcome, Terms};

/// Working precision for all gap computations.
pub const GAP_PRECISION: u32 = 128;

/// Bisection depth cap for the `r`-subdivision.
pub const MAX_DEPTH: u32 = 40;

/// Pieces are refined until their upper bound is within this of the best
/// point value, so `sup_bound` is tight and not just below the claim.
pub const SUP_TOL: f64 = 1e-9;

/// `(1 + r) / ((c1·r + d1)(c2·r + d2))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioFunction {
    pub word: Word,
    pub c1: Integer,
    pub d1: Integer,
    pub c2: Integer,
    pub d2: Integer,
}

/// Continuant of `w` with its first digit dropped (`0` for the empty word).
fn k_prime(w: &[u8]) -> Integer {
    match w.split_first() {
        Some((_, rest)) => continuants(&Word(rest.to_vec())).0,
        None => Integer::new(),
    }
}

pub fn ratio_function(w: &Word) -> Result<RatioFunction> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let d = w.digits();
    let minus = &d[..d.len() - 1];
    let (k, k_minus) = continuants(w);
    let c1 = k_prime(d);
    let c2 = Integer::from(&c1 + k_prime(minus));
    let d2 = Integer::from(&k + &k_minus);
    Ok(RatioFunction {
        word: w.clone(),
        c1,
        d1: k,
        c2,
        d2,
    })
}

impl RatioFunction {
    pub fn eval_rational(&self, r: &Rational) -> Rational {
        let lin = |c: &Integer, d: &Integer| Rational::from(r * c) + d;
        let num = Rational::from(r + 1u32);
        num / (lin(&self.c1, &self.d1) * lin(&self.c2, &self.d2))
    }

    pub fn eval_ball(&self, r: &BallMp) -> BallMp {
        let prec = r.precision_bits();
        let lin = |c: &Integer, d: &Integer| {
            r.mul_ball(&BallMp::from_integer(c, prec))
                .add_ball(&BallMp::from_integer(d, prec))
        };
        let num = r.add_ball(&BallMp::one(prec));
        num.div_ball(&lin(&self.c1, &self.d1).mul_ball(&lin(&self.c2, &self.d2)))
    }
}

impl std::fmt::Display for RatioFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(r+1)/(({}r+{})({}r+{}))",
            self.c1, self.d1, self.c2, self.d2
        )
    }
}

/// Outcome of a rigorous sup bound over `r ∈ [0, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct GapInequality {
    pub continuation_words: Vec<String>,
    pub s: String,
    /// The sum is certified below this bound (`1` unless a sharper claim
    /// was requested).
    pub bound: String,
    pub certified: bool,
    pub sup_lo: f64,
    pub sup_hi: f64,
    pub leaves: usize,
    #[serde(skip)]
    pub sup_bound: BallMp,
}

fn sum_powers(fs: &[RatioFunction], r: &BallMp, s: &BallMp) -> BallMp {
    let prec = r.precision_bits();
    fs.iter().fold(BallMp::zero(prec), |acc, f| {
        acc.add_ball(&f.eval_ball(r).powf(s))
    })
}

/// Derivative of `Σ f^s` in `r`: `Σ s·f^s·(1/(1+r) − c1/(c1r+d1) − c2/(c2r+d2))`.
fn sum_powers_deriv(fs: &[RatioFunction], r: &BallMp, s: &BallMp) -> BallMp {
    let prec = r.precision_bits();
    let one = BallMp::one(prec);
    fs.iter().fold(BallMp::zero(prec), |acc, f| {
        let term = |c: &Integer, d: &Integer| {
            let c = BallMp::from_integer(c, prec);
            c.div_ball(&r.mul_ball(&c).add_ball(&BallMp::from_integer(d, prec)))
        };
        let log_d = one
            .div_ball(&r.add_ball(&one))
            .sub_ball(&term(&f.c1, &f.d1))
            .sub_ball(&term(&f.c2, &f.d2));
        acc.add_ball(&s.mul_ball(&f.eval_ball(r).powf(s)).mul_ball(&log_d))
    })
}

/// Upper enclosure of `sup Σ f^s` over `[lo, hi]`: the endpoint value where
/// the derivative has a fixed sign, otherwise the better of the direct
/// enclosure and the mean-value bound around the midpoint.
fn piece_sup(fs: &[RatioFunction], lo: &Rational, hi: &Rational, s: &BallMp) -> BallMp {
    let prec = s.precision_bits();
    let r = r_ball(lo, hi, prec);
    let d = sum_powers_deriv(fs, &r, s);
    if d.is_positive() {
        return sum_powers(fs, &BallMp::from_rational(hi, prec), s);
    }
    if d.is_negative() {
        return sum_powers(fs, &BallMp::from_rational(lo, prec), s);
    }
    let direct = sum_powers(fs, &r, s);
    let mid = Rational::from(lo + hi) / 2u32;
    let half = BallMp::from_rational(&(Rational::from(hi - lo) / 2u32), prec);
    let mv = sum_powers(fs, &BallMp::from_rational(&mid, prec), s)
        .add_ball(&BallMp::new(d.lo.clone(), d.hi.clone()).hull(&d.neg_ball()).mul_ball(&half));
    match direct.intersect(&mv) {
        Some(b) => b,
        None => direct,
    }
}

fn r_ball(lo: &Rational, hi: &Rational, prec: u32) -> BallMp {
    BallMp::from_rational(lo, prec).hull(&BallMp::from_rational(hi, prec))
}

/// Certify `sup_{r∈[0,1]} Σ ratio(w,r)^s < 1`.
pub fn verify_gap(words: &[Word], s: &str) -> Result<GapInequality> {
    verify_gap_below(words, s, "1")
}

/// Certify `sup_{r∈[0,1]} Σ ratio(w,r)^s < bound` by adaptive bisection of
/// `[0, 1]` with ball evaluation on each piece.
pub fn verify_gap_below(words: &[Word], s: &str, bound: &str) -> Result<GapInequality> {
    if words.is_empty() {
        return Err(Error::Invalid("no continuation words".into()));
    }
    let prec = GAP_PRECISION;
    let s_q = parse_rational(s)?;
    if s_q <= 0 {
        return Err(Error::Invalid(format!("exponent {s} must be positive")));
    }
    let s_ball = BallMp::from_rational(&s_q, prec);
    let bound_ball = BallMp::from_rational(&parse_rational(bound)?, prec);
    let fs = words
        .iter()
        .map(ratio_function)
        .collect::<Result<Vec<_>>>()?;

    let mut best_lo = sum_powers(&fs, &BallMp::zero(prec), &s_ball);
    for i in 1..=64u32 {
        let r = BallMp::from_rational(&Rational::from((i, 64u32)), prec);
        let v = sum_powers(&fs, &r, &s_ball);
        if v.lo > best_lo.lo {
            best_lo = v;
        }
    }
    let mut sup_hi: Option<BallMp> = None;
    let mut certified = true;
    let mut leaves = 0usize;
    let mut stack = vec![(Rational::new(), Rational::from(1), 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let v = piece_sup(&fs, &lo, &hi, &s_ball);
        let mid = Rational::from(&lo + &hi) / 2u32;
        let at_mid = sum_powers(&fs, &BallMp::from_rational(&mid, prec), &s_ball);
        if at_mid.lo > best_lo.lo {
            best_lo = at_mid.clone();
        }
        let decided = v.definitely_lt(&bound_ball);
        let tight = v.hi_f64() - best_lo.lo_f64() <= SUP_TOL;
        if (decided && tight) || depth >= MAX_DEPTH || !at_mid.definitely_lt(&bound_ball) {
            if !decided {
                certified = false;
            }
            leaves += 1;
            sup_hi = Some(match sup_hi {
                Some(h) if h.hi >= v.hi => h,
                _ => v,
            });
            if !certified && !at_mid.definitely_lt(&bound_ball) {
                // a point value already reaches the bound
                break;
            }
            continue;
        }
        stack.push((mid.clone(), hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    let hi = sup_hi.expect("at least one leaf");
    let sup_bound = BallMp::new(best_lo.lo.clone(), hi.hi.clone());
    Ok(GapInequality {
        continuation_words: words.iter().map(|w| w.to_string()).collect(),
        s: s.to_string(),
        bound: bound.to_string(),
        certified,
        sup_lo: sup_bound.lo_f64(),
        sup_hi: sup_bound.hi_f64(),
        leaves,
        sup_bound,
    })
}

/// Rigorous `Σ c_i^s` for exact decimal or fractional constants.
pub fn constant_sum(bounds: &[&str], s: &str) -> Result<BallMp> {
    let prec = GAP_PRECISION;
    let s_ball = BallMp::from_rational(&parse_rational(s)?, prec);
    let mut acc = BallMp::zero(prec);
    for b in bounds {
        let c = parse_rational(b)?;
        if c <= 0 || c >= 1 {
            return Err(Error::Invalid(format!("constant {b} not in (0, 1)")));
        }
        acc = acc.add_ball(&BallMp::from_rational(&c, prec).powf(&s_ball));
    }
    Ok(acc)
}

/// `Σ c_i^s < 1`, decided rigorously.
pub fn verify_gap_constants(bounds: &[&str], s: &str) -> Result<bool> {
    Ok(constant_sum(bounds, s)?.definitely_lt(&BallMp::one(GAP_PRECISION)))
}

/// Enclosure of `sup_{r∈[0,1]} ratio(w, r)`.
///
/// The ratio is unimodal on `r > -1`; its only critical point solves
/// `c1·c2·(r+1)² = c1·c2 + d1·d2 − c1·d2 − c2·d1`.
pub fn ratio_sup(w: &Word) -> Result<BallMp> {
    let prec = GAP_PRECISION;
    let f = ratio_function(w)?;
    let cc = Integer::from(&f.c1 * &f.c2);
    let rhs = Integer::from(&cc + Integer::from(&f.d1 * &f.d2))
        - Integer::from(&f.c1 * &f.d2)
        - Integer::from(&f.c2 * &f.d1);
    let sq = Rational::from((rhs, cc));
    let r = if sq <= 1 {
        BallMp::zero(prec)
    } else if sq >= 4 {
        BallMp::one(prec)
    } else {
        BallMp::from_rational(&sq, prec)
            .sqrt()
            .sub_ball(&BallMp::one(prec))
    };
    Ok(f.eval_ball(&r))
}

/// A printed constant that is smaller than the true supremum of the ratio
/// it is meant to bound.
#[derive(Clone, Debug, Serialize)]
pub struct Discrepancy {
    pub word: String,
    pub constant: String,
    pub sup_lo: f64,
    pub sup_hi: f64,
    pub ratio: String,
}

/// Compare each `(constant, word)` pair against `sup_r ratio(word, r)`.
/// Pairs whose constant is provably below the supremum are returned.
pub fn constant_discrepancies(pairs: &[(String, Word)]) -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();
    for (c, w) in pairs {
        let q = parse_rational(c)?;
        let sup = ratio_sup(w)?;
        let cb = BallMp::from_rational(&q, GAP_PRECISION);
        if cb.definitely_lt(&sup) {
            out.push(Discrepancy {
                word: w.to_string(),
                constant: c.clone(),
                sup_lo: sup.lo_f64(),
                sup_hi: sup.hi_f64(),
                ratio: ratio_function(w)?.to_string(),
            });
        }
    }
    Ok(out)
}

/// Both sides of `[4; 4̄] + [0; 3, (1312)̄] = 9/2 = [3; 1, 3, 4̄] + [0; (1213)̄]`.
pub fn nine_halves_identity(prec: u32) -> Result<(BallMp, BallMp)> {
    let four: PointedWord = "4*".parse()?;
    let three: PointedWord = "3*".parse()?;
    let a = lambda0::<Mp>(
        &TailSpec::behind(&[3], &TailSpec::periodic(&[1, 3, 1, 2])),
        &four,
        &TailSpec::periodic(&[4]),
        prec,
    );
    let b = lambda0::<Mp>(
        &TailSpec::periodic(&[1, 2, 1, 3]),
        &three,
        &TailSpec::behind(&[1, 3], &TailSpec::periodic(&[4])),
        prec,
    );
    Ok((a, b))
}

/// `[3; 1,2,3,1,1,1,(31)̄] + [0; 3,1,2,1,3,3,(31)̄]`, a lower bound for the
/// values of `3*12` in the `(3.92, 3.9623)` analysis.
pub fn lambda0_3_12_witness(prec: u32) -> Result<BallMp> {
    let three: PointedWord = "3*".parse()?;
    Ok(lambda0::<Mp>(
        &TailSpec::behind(&[3, 1, 2, 1, 3, 3], &TailSpec::periodic(&[3, 1])),
        &three,
        &TailSpec::behind(&[1, 2, 3, 1, 1, 1], &TailSpec::periodic(&[3, 1])),
        prec,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn coeffs(f: &RatioFunction) -> [i64; 4] {
        [&f.c1, &f.d1, &f.c2, &f.d2].map(|x| x.to_i64().unwrap())
    }

    #[test]
    fn displayed_ratio_functions() {
        assert_eq!(coeffs(&ratio_function(&w("2131")).unwrap()), [5, 14, 9, 25]);
        assert_eq!(coeffs(&ratio_function(&w("1")).unwrap()), [1, 1, 1, 2]);
        assert_eq!(
            coeffs(&ratio_function(&w("331312")).unwrap()),
            [53, 173, 72, 235]
        );
        assert_eq!(coeffs(&ratio_function(&w("44")).unwrap()), [4, 17, 5, 21]);
        assert_eq!(
            coeffs(&ratio_function(&w("3131213")).unwrap()),
            [71, 269, 90, 341]
        );
        assert!(ratio_function(&Word::empty()).is_err());
    }

    #[test]
    fn single_one_has_sup_half() {
        let g = verify_gap(&[w("1")], "1").unwrap();
        assert!(g.certified);
        assert!(g.sup_bound.contains_rational(&Rational::from((1, 2))));
    }

    #[test]
    fn constants() {
        assert!(verify_gap_constants(&["0.00254", "1/63"], "0.153").unwrap());
        assert!(verify_gap_constants(&["2/3619", "0.0718"], "0.15").unwrap());
        assert!(!verify_gap_constants(&["0.9", "0.9"], "0.5").unwrap());
        assert!(verify_gap_constants(&["1.5"], "0.5").is_err());
    }

    #[test]
    fn sup_matches_dense_sampling() {
        for word in ["1", "231", "23", "44", "3131213", "113"] {
            let f = ratio_function(&w(word)).unwrap();
            let sup = ratio_sup(&w(word)).unwrap();
            assert!(sup.width_f64() < 1e-30);
            for i in 0..=1000 {
                let v = f.eval_rational(&Rational::from((i, 1000)));
                assert!(!sup.definitely_lt(&BallMp::from_rational(&v, GAP_PRECISION)));
            }
        }
        let s231 = ratio_sup(&w("231")).unwrap();
        assert!(s231.definitely_gt(&BallMp::from_ratio(1, 144, GAP_PRECISION)));
    }
}
