//! Interval enclosures `[lo, hi]` with outward-rounded endpoints.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Float as MpFloat, Integer, Rational};

use crate::error::{Error, Result};
use crate::scalar::{Endpoint, Mp, Rnd};

/// Three-valued comparison against a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp3 {
    Less,
    Greater,
    Undecided,
}

/// A closed interval containing the exact value of a computation.
#[derive(Clone, PartialEq)]
pub struct Ball<E: Endpoint> {
    pub lo: E,
    pub hi: E,
}

pub type BallF64 = Ball<f64>;
pub type BallMp = Ball<Mp>;
/// Multiprecision enclosure used by the continued-fraction kernel.
pub type BallInterval = Ball<Mp>;

impl<E: Endpoint> fmt::Debug for Ball<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

impl<E: Endpoint> fmt::Display for Ball<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(12);
        write!(f, "[{}, {}]", self.lo_string(d), self.hi_string(d))
    }
}

impl<E: Endpoint> Ball<E> {
    pub fn new(lo: E, hi: E) -> Self {
        debug_assert!(
            !matches!(lo.partial_cmp_to(&hi), Some(Ordering::Greater)),
            "inverted ball {:?} {:?}",
            lo,
            hi
        );
        Ball { lo, hi }
    }

    pub fn precision_bits(&self) -> u32 {
        self.lo.precision()
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        Ball {
            lo: E::from_f64(x, prec, Rnd::Down),
            hi: E::from_f64(x, prec, Rnd::Up),
        }
    }

    pub fn from_i64(x: i64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(x), prec)
    }

    pub fn from_integer(x: &Integer, prec: u32) -> Self {
        Ball {
            lo: E::from_integer(x, prec, Rnd::Down),
            hi: E::from_integer(x, prec, Rnd::Up),
        }
    }

    pub fn from_rational(x: &Rational, prec: u32) -> Self {
        Ball {
            lo: E::from_rational(x, prec, Rnd::Down),
            hi: E::from_rational(x, prec, Rnd::Up),
        }
    }

    pub fn from_ratio(num: i64, den: i64, prec: u32) -> Self {
        Self::from_rational(&Rational::from((num, den)), prec)
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    /// The whole real line.
    pub fn entire(prec: u32) -> Self {
        Ball {
            lo: E::infinity(prec, true),
            hi: E::infinity(prec, false),
        }
    }

    /// `[-h, h]` for `h >= 0`.
    pub fn symmetric(h: &E) -> Self {
        Ball {
            lo: h.neg(),
            hi: h.clone(),
        }
    }

    /// Convert endpoints to another precision/representation, rounding outward.
    pub fn convert<F: Endpoint>(&self, prec: u32) -> Ball<F> {
        let lo = Rational::try_from(self.lo.to_mpfr());
        let hi = Rational::try_from(self.hi.to_mpfr());
        match (lo, hi) {
            (Ok(lo), Ok(hi)) => Ball {
                lo: F::from_rational(&lo, prec, Rnd::Down),
                hi: F::from_rational(&hi, prec, Rnd::Up),
            },
            _ => Ball::entire(prec),
        }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> E {
        self.hi.sub(&self.lo, Rnd::Up)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// `lo > 0`.
    pub fn is_positive(&self) -> bool {
        matches!(self.lo.cmp_zero(), Some(Ordering::Greater))
    }

    /// `hi < 0`.
    pub fn is_negative(&self) -> bool {
        matches!(self.hi.cmp_zero(), Some(Ordering::Less))
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Whether `other` lies inside `self`.
    pub fn contains(&self, other: &Self) -> bool {
        !matches!(self.lo.partial_cmp_to(&other.lo), Some(Ordering::Greater) | None)
            && !matches!(self.hi.partial_cmp_to(&other.hi), Some(Ordering::Less) | None)
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        let lo = self.lo.to_mpfr();
        let hi = self.hi.to_mpfr();
        lo.partial_cmp(q) != Some(Ordering::Greater) && hi.partial_cmp(q) != Some(Ordering::Less)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.to_mpfr() <= x && self.hi.to_mpfr() >= x
    }

    /// Compare every point of `self` with every point of `other`.
    pub fn cmp3(&self, other: &Self) -> Cmp3 {
        if matches!(self.hi.partial_cmp_to(&other.lo), Some(Ordering::Less)) {
            Cmp3::Less
        } else if matches!(self.lo.partial_cmp_to(&other.hi), Some(Ordering::Greater)) {
            Cmp3::Greater
        } else {
            Cmp3::Undecided
        }
    }

    pub fn definitely_lt(&self, other: &Self) -> bool {
        self.cmp3(other) == Cmp3::Less
    }

    pub fn definitely_gt(&self, other: &Self) -> bool {
        self.cmp3(other) == Cmp3::Greater
    }

    pub fn hull(&self, o: &Self) -> Self {
        Ball {
            lo: E::min_of(&self.lo, &o.lo),
            hi: E::max_of(&self.hi, &o.hi),
        }
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = E::max_of(&self.lo, &o.lo);
        let hi = E::min_of(&self.hi, &o.hi);
        match lo.partial_cmp_to(&hi) {
            Some(Ordering::Greater) | None => None,
            _ => Some(Ball { lo, hi }),
        }
    }

    pub fn add_ball(&self, o: &Self) -> Self {
        Ball {
            lo: self.lo.add(&o.lo, Rnd::Down),
            hi: self.hi.add(&o.hi, Rnd::Up),
        }
    }

    pub fn sub_ball(&self, o: &Self) -> Self {
        Ball {
            lo: self.lo.sub(&o.hi, Rnd::Down),
            hi: self.hi.sub(&o.lo, Rnd::Up),
        }
    }

    pub fn neg_ball(&self) -> Self {
        Ball {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn mul_ball(&self, o: &Self) -> Self {
        let a_pos = !matches!(self.lo.cmp_zero(), Some(Ordering::Less));
        let b_pos = !matches!(o.lo.cmp_zero(), Some(Ordering::Less));
        if a_pos && b_pos {
            return Ball {
                lo: self.lo.mul(&o.lo, Rnd::Down),
                hi: self.hi.mul(&o.hi, Rnd::Up),
            };
        }
        let cands = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo = cands[0].0.mul(cands[0].1, Rnd::Down);
        let mut hi = cands[0].0.mul(cands[0].1, Rnd::Up);
        for (x, y) in &cands[1..] {
            lo = E::min_of(&lo, &x.mul(y, Rnd::Down));
            hi = E::max_of(&hi, &x.mul(y, Rnd::Up));
        }
        Ball { lo, hi }
    }

    pub fn sqr(&self) -> Self {
        if self.is_positive() || !matches!(self.lo.cmp_zero(), Some(Ordering::Less)) {
            Ball {
                lo: self.lo.mul(&self.lo, Rnd::Down),
                hi: self.hi.mul(&self.hi, Rnd::Up),
            }
        } else if self.is_negative() {
            Ball {
                lo: self.hi.mul(&self.hi, Rnd::Down),
                hi: self.lo.mul(&self.lo, Rnd::Up),
            }
        } else {
            let a = self.lo.mul(&self.lo, Rnd::Up);
            let b = self.hi.mul(&self.hi, Rnd::Up);
            Ball {
                lo: E::from_f64(0.0, self.precision_bits(), Rnd::Down),
                hi: E::max_of(&a, &b),
            }
        }
    }

    /// Reciprocal; the whole line if `self` contains zero.
    pub fn recip(&self) -> Self {
        let prec = self.precision_bits();
        if self.contains_zero() {
            return Ball::entire(prec);
        }
        let one = E::from_f64(1.0, prec, Rnd::Down);
        Ball {
            lo: one.div(&self.hi, Rnd::Down),
            hi: one.div(&self.lo, Rnd::Up),
        }
    }

    pub fn div_ball(&self, o: &Self) -> Self {
        if o.contains_zero() {
            return Ball::entire(self.precision_bits());
        }
        let a_pos = !matches!(self.lo.cmp_zero(), Some(Ordering::Less));
        if a_pos && o.is_positive() {
            return Ball {
                lo: self.lo.div(&o.hi, Rnd::Down),
                hi: self.hi.div(&o.lo, Rnd::Up),
            };
        }
        let cands = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo = cands[0].0.div(cands[0].1, Rnd::Down);
        let mut hi = cands[0].0.div(cands[0].1, Rnd::Up);
        for (x, y) in &cands[1..] {
            lo = E::min_of(&lo, &x.div(y, Rnd::Down));
            hi = E::max_of(&hi, &x.div(y, Rnd::Up));
        }
        Ball { lo, hi }
    }

    /// Square root of the non-negative part.
    pub fn sqrt(&self) -> Self {
        let prec = self.precision_bits();
        let zero = E::from_f64(0.0, prec, Rnd::Down);
        let lo = if matches!(self.lo.cmp_zero(), Some(Ordering::Greater)) {
            self.lo.sqrt(Rnd::Down)
        } else {
            zero.clone()
        };
        let hi = if matches!(self.hi.cmp_zero(), Some(Ordering::Greater)) {
            self.hi.sqrt(Rnd::Up)
        } else {
            zero
        };
        Ball { lo, hi }
    }

    pub fn exp(&self) -> Self {
        Ball {
            lo: self.lo.exp(Rnd::Down),
            hi: self.hi.exp(Rnd::Up),
        }
    }

    /// Natural logarithm; requires a positive ball.
    pub fn ln(&self) -> Self {
        if !self.is_positive() {
            let prec = self.precision_bits();
            return Ball {
                lo: E::infinity(prec, true),
                hi: if self.is_negative() {
                    E::infinity(prec, true)
                } else {
                    self.hi.ln(Rnd::Up)
                },
            };
        }
        Ball {
            lo: self.lo.ln(Rnd::Down),
            hi: self.hi.ln(Rnd::Up),
        }
    }

    /// `self^s` for a positive base.
    pub fn powf(&self, s: &Self) -> Self {
        s.mul_ball(&self.ln()).exp()
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Ball::one(self.precision_bits());
        let mut base = self.clone();
        let mut k = n;
        if k % 2 == 0 {
            // even powers are non-negative
            let mut r = Ball::one(self.precision_bits());
            let mut b = self.sqr();
            k /= 2;
            while k > 0 {
                if k & 1 == 1 {
                    r = r.mul_ball(&b);
                }
                b = b.sqr();
                k >>= 1;
            }
            return r;
        }
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_ball(&base);
            }
            base = base.sqr();
            k >>= 1;
        }
        acc
    }

    /// Enclosure of `{x^j : x in [-h, h]}`.
    pub fn sym_pow(h: &E, j: u32) -> Self {
        let prec = h.precision();
        if j == 0 {
            return Ball::one(prec);
        }
        let hb = Ball {
            lo: h.clone(),
            hi: h.clone(),
        };
        let p = hb.powi(j).hi;
        if j % 2 == 0 {
            Ball {
                lo: E::from_f64(0.0, prec, Rnd::Down),
                hi: p,
            }
        } else {
            Ball { lo: p.neg(), hi: p }
        }
    }

    pub fn abs_hi(&self) -> E {
        E::max_of(&self.lo.neg(), &self.hi)
    }

    /// Decimal string of the lower endpoint rounded down.
    pub fn lo_string(&self, digits: usize) -> String {
        decimal_string(&self.lo.to_mpfr(), digits, Rnd::Down)
    }

    /// Decimal string of the upper endpoint rounded up.
    pub fn hi_string(&self, digits: usize) -> String {
        decimal_string(&self.hi.to_mpfr(), digits, Rnd::Up)
    }

    /// Parse a small arithmetic expression: decimal literals, fractions,
    /// `sqrt(...)`, parentheses and `+ - * /`.
    pub fn parse_expr(s: &str, prec: u32) -> Result<Self> {
        let toks: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = ExprParser {
            s: &toks,
            pos: 0,
            prec,
            src: s,
        };
        let v = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::Parse(format!("trailing input in expression {s:?}")));
        }
        Ok(v)
    }
}

pub fn decimal_string(x: &MpFloat, digits: usize, rnd: Rnd) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r = match rnd {
        Rnd::Down => rug::float::Round::Down,
        Rnd::Up => rug::float::Round::Up,
    };
    plain_decimal(&x.to_string_radix_round(10, Some(digits), r))
}

/// Rewrite `d.ddde±k` without an exponent.
fn plain_decimal(s: &str) -> String {
    let Some((mant, exp)) = s.split_once('e') else {
        return s.to_string();
    };
    let Ok(exp) = exp.parse::<i64>() else {
        return s.to_string();
    };
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{ip}{fp}");
    let point = ip.len() as i64 + exp;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{body}")
}

/// Exact rational value of a decimal literal such as `3.334369`, `-2e-5`,
/// or a fraction `2/3619`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        if b == 0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(a / b);
    }
    let bad = || Error::Parse(format!("bad decimal literal {s:?}"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10)
        .map_err(|_| bad())?;
    let e = exp - frac.len() as i32;
    let mut q = Rational::from(n);
    if e >= 0 {
        q *= Integer::from(Integer::u_pow_u(10, e as u32));
    } else {
        q /= Integer::from(Integer::u_pow_u(10, (-e) as u32));
    }
    if neg {
        q = -q;
    }
    Ok(q)
}

struct ExprParser<'a> {
    s: &'a [char],
    pos: usize,
    prec: u32,
    src: &'a str,
}

impl<'a> ExprParser<'a> {
    fn err(&self) -> Error {
        Error::Parse(format!("cannot parse expression {:?} at {}", self.src, self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn expr<E: Endpoint>(&mut self) -> Result<Ball<E>> {
        let mut v = self.term()?;
        while let Some(c) = self.peek() {
            if c == '+' {
                self.pos += 1;
                v = v.add_ball(&self.term()?);
            } else if c == '-' {
                self.pos += 1;
                v = v.sub_ball(&self.term()?);
            } else {
                break;
            }
        }
        Ok(v)
    }

    fn term<E: Endpoint>(&mut self) -> Result<Ball<E>> {
        let mut v = self.factor()?;
        while let Some(c) = self.peek() {
            if c == '*' {
                self.pos += 1;
                v = v.mul_ball(&self.factor()?);
            } else if c == '/' {
                self.pos += 1;
                v = v.div_ball(&self.factor()?);
            } else {
                break;
            }
        }
        Ok(v)
    }

    fn factor<E: Endpoint>(&mut self) -> Result<Ball<E>> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err());
                }
                self.pos += 1;
                Ok(v)
            }
            Some('-') => {
                self.pos += 1;
                Ok(self.factor::<E>()?.neg_ball())
            }
            Some('s') => {
                let word: String = self.s[self.pos..].iter().take(4).collect();
                if word != "sqrt" {
                    return Err(self.err());
                }
                self.pos += 4;
                if self.peek() != Some('(') {
                    return Err(self.err());
                }
                Ok(self.factor::<E>()?.sqrt())
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    let exp_sign = (c == '-' || c == '+')
                        && self.pos > start
                        && matches!(self.s[self.pos - 1], 'e' | 'E');
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let lit: String = self.s[start..self.pos].iter().collect();
                Ok(Ball::from_rational(&parse_rational(&lit)?, self.prec))
            }
            _ => Err(self.err()),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<'a, E: Endpoint> $tr<&'a Ball<E>> for &'a Ball<E> {
            type Output = Ball<E>;
            fn $m(self, o: &'a Ball<E>) -> Ball<E> {
                self.$f(o)
            }
        }
        impl<E: Endpoint> $tr<Ball<E>> for Ball<E> {
            type Output = Ball<E>;
            fn $m(self, o: Ball<E>) -> Ball<E> {
                self.$f(&o)
            }
        }
        impl<'a, E: Endpoint> $tr<&'a Ball<E>> for Ball<E> {
            type Output = Ball<E>;
            fn $m(self, o: &'a Ball<E>) -> Ball<E> {
                self.$f(o)
            }
        }
    };
}

binop!(Add, add, add_ball);
binop!(Sub, sub, sub_ball);
binop!(Mul, mul, mul_ball);
binop!(Div, div, div_ball);

impl<E: Endpoint> Neg for Ball<E> {
    type Output = Ball<E>;
    fn neg(self) -> Ball<E> {
        self.neg_ball()
    }
}

impl<E: Endpoint> Neg for &Ball<E> {
    type Output = Ball<E>;
    fn neg(self) -> Ball<E> {
        self.neg_ball()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_decimals() {
        assert_eq!(plain_decimal("9.17079e-1"), "0.917079");
        assert_eq!(plain_decimal("-1.25e-3"), "-0.00125");
        assert_eq!(plain_decimal("1.000425"), "1.000425");
        assert_eq!(plain_decimal("3.5e2"), "350");
        assert_eq!(plain_decimal("3.5e0"), "3.5");
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("3.334369").unwrap(), Rational::from((3334369, 1000000)));
        assert_eq!(parse_rational("2/3619").unwrap(), Rational::from((2, 3619)));
        assert_eq!(parse_rational("9.71e-6").unwrap(), Rational::from((971, 100000000)));
        assert_eq!(parse_rational("-0.5").unwrap(), Rational::from((-1, 2)));
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn expression_sqrt12() {
        let b: BallMp = Ball::parse_expr("sqrt(12)", 128).unwrap();
        let sq = b.sqr();
        assert!(sq.contains_rational(&Rational::from(12)));
        assert!(b.width_f64() < 1e-36);
        let c: BallMp = Ball::parse_expr("2+2/sqrt(3)", 128).unwrap();
        assert!((c.mid_f64() - (2.0 + 2.0 / 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn f64_ball_third_encloses() {
        let t: BallF64 = Ball::from_ratio(1, 3, 53);
        assert!(t.contains_rational(&Rational::from((1, 3))));
        let x = t.mul_ball(&Ball::from_i64(3, 53));
        assert!(x.contains_rational(&Rational::from(1)));
    }

    #[test]
    fn sym_pow_even_is_nonnegative() {
        let h = 0.5f64;
        let p = Ball::<f64>::sym_pow(&h, 2);
        assert_eq!(p.lo, 0.0);
        assert!(p.hi >= 0.25);
        let q = Ball::<f64>::sym_pow(&h, 3);
        assert!(q.lo <= -0.125 && q.hi >= 0.125);
    }
}
