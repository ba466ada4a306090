//! Continued-fraction primitives: continuants, cylinders, Möbius maps,
//! periodic tails, `λ₀` values and the interval `J` of a pointed word.

use rug::{Integer, Rational};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::scalar::Endpoint;
use crate::word::{PointedWord, TailSpec, Word};

/// Default working precision of the kernel, in bits.
pub const DEFAULT_PRECISION: u32 = 128;

/// `(K(w), K(w without its last digit))`, with `K(∅) = 1` and the
/// predecessor of the empty word taken as 0.
pub fn continuants(w: &Word) -> (Integer, Integer) {
    let mut prev = Integer::from(0);
    let mut cur = Integer::from(1);
    for &a in w.digits() {
        let next = Integer::from(a) * &cur + &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    (cur, prev)
}

/// Same as [`continuants`] in machine integers; digits up to 9 and length
/// up to 18 never overflow.
pub fn continuants_u64(w: &[u8]) -> (u64, u64) {
    let (mut prev, mut cur) = (0u64, 1u64);
    for &a in w {
        let next = a as u64 * cur + prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Length of the cylinder `I(w)`: `1/(q(q+q'))`.
pub fn cylinder_length(w: &Word) -> Result<Rational> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let (q, qp) = continuants(w);
    let den = Integer::from(&q + &qp) * q;
    Ok(Rational::from((Integer::from(1), den)))
}

/// `x ↦ (p_cur + p_prev·x)/(q_cur + q_prev·x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoebiusMap {
    pub p_prev: Integer,
    pub p_cur: Integer,
    pub q_prev: Integer,
    pub q_cur: Integer,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        MoebiusMap {
            p_prev: Integer::from(1),
            p_cur: Integer::from(0),
            q_prev: Integer::from(0),
            q_cur: Integer::from(1),
        }
    }

    /// `p_prev·q_cur − p_cur·q_prev`, always ±1 for digit compositions.
    pub fn det(&self) -> Integer {
        Integer::from(&self.p_prev * &self.q_cur) - Integer::from(&self.p_cur * &self.q_prev)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let num = Rational::from(&self.p_prev * x) + &self.p_cur;
        let den = Rational::from(&self.q_prev * x) + &self.q_cur;
        num / den
    }

    /// Enclosure of the image of a point or interval. The map is monotone on
    /// `[0, ∞)`, so endpoints are mapped separately.
    pub fn eval_ball<E: Endpoint>(&self, x: &Ball<E>) -> Ball<E> {
        let prec = x.precision_bits();
        let pc = Ball::from_integer(&self.p_cur, prec);
        let pp = Ball::from_integer(&self.p_prev, prec);
        let qc = Ball::from_integer(&self.q_cur, prec);
        let qp = Ball::from_integer(&self.q_prev, prec);
        let f = |y: &E| {
            let yb = Ball::new(y.clone(), y.clone());
            (&pc + &(&pp * &yb)) / (&qc + &(&qp * &yb))
        };
        f(&x.lo).hull(&f(&x.hi))
    }

    /// `|T'(x)| = 1/(q_cur + q_prev·x)²`.
    pub fn deriv_abs_ball<E: Endpoint>(&self, x: &Ball<E>) -> Ball<E> {
        let prec = x.precision_bits();
        let qc = Ball::from_integer(&self.q_cur, prec);
        let qp = Ball::from_integer(&self.q_prev, prec);
        (&qc + &(&qp * x)).sqr().recip()
    }

    /// `self ∘ other`.
    pub fn then(&self, other: &MoebiusMap) -> MoebiusMap {
        // matrices [[p_prev, p_cur], [q_prev, q_cur]] acting on (x, 1)
        let a = [[&self.p_prev, &self.p_cur], [&self.q_prev, &self.q_cur]];
        let b = [[&other.p_prev, &other.p_cur], [&other.q_prev, &other.q_cur]];
        let m = |i: usize, j: usize| Integer::from(a[i][0] * b[0][j]) + Integer::from(a[i][1] * b[1][j]);
        MoebiusMap {
            p_prev: m(0, 0),
            p_cur: m(0, 1),
            q_prev: m(1, 0),
            q_cur: m(1, 1),
        }
    }
}

/// `T_{a₁} ∘ … ∘ T_{aₙ}` with `T_a(x) = 1/(a + x)`. The empty word gives
/// the identity.
pub fn compose(w: &Word) -> MoebiusMap {
    let (mut p_prev, mut p_cur) = (Integer::from(1), Integer::from(0));
    let (mut q_prev, mut q_cur) = (Integer::from(0), Integer::from(1));
    for &a in w.digits() {
        let np = Integer::from(a) * &p_cur + &p_prev;
        let nq = Integer::from(a) * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, np);
        q_prev = std::mem::replace(&mut q_cur, nq);
    }
    MoebiusMap {
        p_prev,
        p_cur,
        q_prev,
        q_cur,
    }
}

/// `[0; a₁, …, aₙ]` in exact arithmetic.
pub fn cf_value(w: &Word) -> Rational {
    let mut x = Rational::from(0);
    for &a in w.digits().iter().rev() {
        x = Rational::from(1) / (x + Integer::from(a));
    }
    x
}

/// Enclosure of `[0; preperiod, period, period, …]`.
///
/// The periodic part is the positive root of
/// `q_prev·y² + (q_cur − p_prev)·y − p_cur = 0`, evaluated in the
/// cancellation-free form `2·p_cur / (b + √(b² + 4·p_cur·q_prev))`.
pub fn eval_periodic<E: Endpoint>(tail: &TailSpec, prec: u32) -> Ball<E> {
    let m = compose(&tail.period);
    let b = Integer::from(&m.q_cur - &m.p_prev);
    let disc = Integer::from(&b * &b) + Integer::from(&m.p_cur * &m.q_prev) * 4u32;
    let root = Ball::<E>::from_integer(&disc, prec).sqrt();
    let two_a = Ball::<E>::from_integer(&Integer::from(&m.p_cur * 2u32), prec);
    let y = two_a / (Ball::from_integer(&b, prec) + root);
    compose(&tail.preperiod).eval_ball(&y)
}

/// Enclosure of `λ₀ = [a₀; a₁, a₂, …] + [0; a₋₁, a₋₂, …]` for the sequence
/// `left (read outward) · center · right`.
pub fn lambda0<E: Endpoint>(
    left: &TailSpec,
    center: &PointedWord,
    right: &TailSpec,
    prec: u32,
) -> Ball<E> {
    let r = eval_periodic::<E>(&TailSpec::behind(center.right(), right), prec);
    let l = eval_periodic::<E>(&TailSpec::behind(&center.left_outward(), left), prec);
    Ball::from_i64(center.a0() as i64, prec) + r + l
}

/// Enclosure of `J(pw)`, the hull of `λ₀` over all two-sided `{1,2}`
/// extensions of `pw`. The extremal extensions are the alternating tails,
/// chosen by the parities of the number of digits on each side.
pub fn j_interval<E: Endpoint>(pw: &PointedWord, prec: u32) -> Result<Ball<E>> {
    let (lo, hi) = j_endpoints::<E>(pw, prec)?;
    Ok(Ball::new(lo.lo, hi.hi))
}

/// Separate enclosures of the left and right endpoints of `J(pw)`.
pub fn j_endpoints<E: Endpoint>(pw: &PointedWord, prec: u32) -> Result<(Ball<E>, Ball<E>)> {
    pw.word.check_alphabet(2)?;
    let (k, j) = (pw.k(), pw.j());
    let even_tail = |n: usize| {
        if n % 2 == 0 {
            TailSpec::one_two()
        } else {
            TailSpec::two_one()
        }
    };
    let odd_tail = |n: usize| {
        if n % 2 == 0 {
            TailSpec::two_one()
        } else {
            TailSpec::one_two()
        }
    };
    let hi = lambda0::<E>(&even_tail(k), pw, &even_tail(j), prec);
    let lo = lambda0::<E>(&odd_tail(k), pw, &odd_tail(j), prec);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::BallMp;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn continuant_examples() {
        assert_eq!(continuants(&w("1")), (Integer::from(1), Integer::from(1)));
        assert_eq!(continuants(&w("2131")), (Integer::from(14), Integer::from(11)));
        assert_eq!(continuants(&w("113131")).0, 43);
        assert_eq!(continuants(&Word::empty()), (Integer::from(1), Integer::from(0)));
        assert_eq!(continuants_u64(&[2, 1, 3, 1]), (14, 11));
    }

    #[test]
    fn cylinder_examples() {
        assert_eq!(cylinder_length(&w("1")).unwrap(), Rational::from((1, 2)));
        assert_eq!(cylinder_length(&w("11")).unwrap(), Rational::from((1, 6)));
        assert!(cylinder_length(&Word::empty()).is_err());
    }

    #[test]
    fn compose_examples() {
        let m = compose(&w("1"));
        assert_eq!(m.eval_rational(&Rational::from(0)), 1);
        assert_eq!(m.eval_rational(&Rational::from(1)), Rational::from((1, 2)));
        assert_eq!(compose(&w("2")).eval_rational(&Rational::from(0)), Rational::from((1, 2)));
        assert_eq!(compose(&w("12")).eval_rational(&Rational::from(0)), Rational::from((2, 3)));
        assert_eq!(compose(&w("2131")).det().abs(), 1);
    }

    #[test]
    fn periodic_golden_ratio() {
        let b: BallMp = eval_periodic(&TailSpec::periodic(&[1]), 128);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert!((b.mid_f64() - g).abs() < 1e-15);
        assert!(b.width_f64() < 2f64.powi(-124));
    }
}
