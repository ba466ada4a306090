//! Scalar abstractions.
//!
//! [`Real`] is the point-arithmetic scalar (f32/f64) used by the collocation
//! and eigenvector code. [`Endpoint`] is the endpoint type of a [`crate::Ball`]
//! and carries directed rounding; it is implemented for `f64` (fast, outward
//! rounded by one ulp per operation) and for [`Mp`] (MPFR, any precision).

use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumCast};
use rug::float::Round;
use rug::{Float as MpFloat, Integer, Rational};

/// Floating point scalar for non-rigorous work: f32 or f64.
pub trait Real: Float + FromPrimitive + NumCast + Debug + Send + Sync + 'static {}
impl Real for f32 {}
impl Real for f64 {}

/// Rounding direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rnd {
    Down,
    Up,
}

impl Rnd {
    fn mpfr(self) -> Round {
        match self {
            Rnd::Down => Round::Down,
            Rnd::Up => Round::Up,
        }
    }
}

/// A floating point type with directed rounding, usable as a ball endpoint.
///
/// Every operation returns a value that is `<=` (for `Rnd::Down`) or `>=`
/// (for `Rnd::Up`) the exact result.
pub trait Endpoint: Clone + Debug + Send + Sync + 'static {
    fn precision(&self) -> u32;
    fn from_f64(x: f64, prec: u32, rnd: Rnd) -> Self;
    fn from_integer(x: &Integer, prec: u32, rnd: Rnd) -> Self;
    fn from_rational(x: &Rational, prec: u32, rnd: Rnd) -> Self;
    fn infinity(prec: u32, negative: bool) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact value as an MPFR float (no rounding).
    fn to_mpfr(&self) -> MpFloat;
    fn is_finite(&self) -> bool;
    fn partial_cmp_to(&self, other: &Self) -> Option<Ordering>;
    fn cmp_zero(&self) -> Option<Ordering>;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self, rnd: Rnd) -> Self;
    fn sub(&self, o: &Self, rnd: Rnd) -> Self;
    fn mul(&self, o: &Self, rnd: Rnd) -> Self;
    fn div(&self, o: &Self, rnd: Rnd) -> Self;
    fn sqrt(&self, rnd: Rnd) -> Self;
    fn exp(&self, rnd: Rnd) -> Self;
    fn ln(&self, rnd: Rnd) -> Self;

    fn min_of(a: &Self, b: &Self) -> Self {
        match a.partial_cmp_to(b) {
            Some(Ordering::Greater) => b.clone(),
            _ => a.clone(),
        }
    }
    fn max_of(a: &Self, b: &Self) -> Self {
        match a.partial_cmp_to(b) {
            Some(Ordering::Less) => b.clone(),
            _ => a.clone(),
        }
    }
}

#[inline]
fn step(x: f64, rnd: Rnd) -> f64 {
    match rnd {
        Rnd::Down => x.next_down(),
        Rnd::Up => x.next_up(),
    }
}

// libm exp/ln are not correctly rounded; glibc documents errors below one
// ulp, so stepping twice past the nearest result is safe.
#[inline]
fn step2(x: f64, rnd: Rnd) -> f64 {
    step(step(x, rnd), rnd)
}

impl Endpoint for f64 {
    fn precision(&self) -> u32 {
        53
    }
    fn from_f64(x: f64, _prec: u32, _rnd: Rnd) -> Self {
        x
    }
    fn from_integer(x: &Integer, _prec: u32, rnd: Rnd) -> Self {
        if let Some(v) = x.to_i64() {
            if v.unsigned_abs() < (1u64 << 53) {
                return v as f64;
            }
        }
        MpFloat::with_val_round(53, x, rnd.mpfr()).0.to_f64()
    }
    fn from_rational(x: &Rational, _prec: u32, rnd: Rnd) -> Self {
        MpFloat::with_val_round(53, x, rnd.mpfr()).0.to_f64()
    }
    fn infinity(_prec: u32, negative: bool) -> Self {
        if negative {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_mpfr(&self) -> MpFloat {
        MpFloat::with_val(53, *self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn partial_cmp_to(&self, other: &Self) -> Option<Ordering> {
        self.partial_cmp(other)
    }
    fn cmp_zero(&self) -> Option<Ordering> {
        self.partial_cmp(&0.0)
    }
    fn neg(&self) -> Self {
        -*self
    }
    #[inline]
    fn add(&self, o: &Self, rnd: Rnd) -> Self {
        if *o == 0.0 {
            return *self;
        }
        if *self == 0.0 {
            return *o;
        }
        step(*self + *o, rnd)
    }
    #[inline]
    fn sub(&self, o: &Self, rnd: Rnd) -> Self {
        if *o == 0.0 {
            return *self;
        }
        step(*self - *o, rnd)
    }
    #[inline]
    fn mul(&self, o: &Self, rnd: Rnd) -> Self {
        if *self == 0.0 || *o == 0.0 {
            return 0.0;
        }
        if *o == 1.0 {
            return *self;
        }
        if *self == 1.0 {
            return *o;
        }
        step(*self * *o, rnd)
    }
    #[inline]
    fn div(&self, o: &Self, rnd: Rnd) -> Self {
        if *self == 0.0 && *o != 0.0 {
            return 0.0;
        }
        if *o == 1.0 {
            return *self;
        }
        step(*self / *o, rnd)
    }
    fn sqrt(&self, rnd: Rnd) -> Self {
        let r = f64::sqrt(*self);
        if r == 0.0 || r.is_infinite() {
            return r;
        }
        let d = step(r, rnd);
        if d < 0.0 {
            0.0
        } else {
            d
        }
    }
    fn exp(&self, rnd: Rnd) -> Self {
        let r = f64::exp(*self);
        if *self == 0.0 {
            return 1.0;
        }
        let d = step2(r, rnd);
        if d < 0.0 {
            0.0
        } else {
            d
        }
    }
    fn ln(&self, rnd: Rnd) -> Self {
        if *self == 1.0 {
            return 0.0;
        }
        step2(f64::ln(*self), rnd)
    }
}

/// MPFR float endpoint. The precision of a result is the larger of the
/// operand precisions.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Mp(pub MpFloat);

impl Mp {
    fn p2(&self, o: &Self) -> u32 {
        self.0.prec().max(o.0.prec())
    }
}

impl Endpoint for Mp {
    fn precision(&self) -> u32 {
        self.0.prec()
    }
    fn from_f64(x: f64, prec: u32, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(prec, x, rnd.mpfr()).0)
    }
    fn from_integer(x: &Integer, prec: u32, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(prec, x, rnd.mpfr()).0)
    }
    fn from_rational(x: &Rational, prec: u32, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(prec, x, rnd.mpfr()).0)
    }
    fn infinity(prec: u32, negative: bool) -> Self {
        let v = if negative {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        Mp(MpFloat::with_val(prec, v))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn to_mpfr(&self) -> MpFloat {
        self.0.clone()
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn partial_cmp_to(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
    fn cmp_zero(&self) -> Option<Ordering> {
        self.0.cmp0()
    }
    fn neg(&self) -> Self {
        Mp(-self.0.clone())
    }
    fn add(&self, o: &Self, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(self.p2(o), &self.0 + &o.0, rnd.mpfr()).0)
    }
    fn sub(&self, o: &Self, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(self.p2(o), &self.0 - &o.0, rnd.mpfr()).0)
    }
    fn mul(&self, o: &Self, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(self.p2(o), &self.0 * &o.0, rnd.mpfr()).0)
    }
    fn div(&self, o: &Self, rnd: Rnd) -> Self {
        Mp(MpFloat::with_val_round(self.p2(o), &self.0 / &o.0, rnd.mpfr()).0)
    }
    fn sqrt(&self, rnd: Rnd) -> Self {
        let mut x = self.0.clone();
        x.sqrt_round(rnd.mpfr());
        Mp(x)
    }
    fn exp(&self, rnd: Rnd) -> Self {
        let mut x = self.0.clone();
        x.exp_round(rnd.mpfr());
        Mp(x)
    }
    fn ln(&self, rnd: Rnd) -> Self {
        let mut x = self.0.clone();
        x.ln_round(rnd.mpfr());
        Mp(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_directed_brackets_exact_third() {
        let one = 1.0f64;
        let three = 3.0f64;
        let lo = Endpoint::div(&one, &three, Rnd::Down);
        let hi = Endpoint::div(&one, &three, Rnd::Up);
        let third = Rational::from((1, 3));
        assert!(Rational::from_f64(lo).unwrap() < third);
        assert!(Rational::from_f64(hi).unwrap() > third);
    }

    #[test]
    fn mp_directed_sqrt2() {
        let two = Mp::from_f64(2.0, 128, Rnd::Down);
        let lo = two.sqrt(Rnd::Down);
        let hi = two.sqrt(Rnd::Up);
        assert!(lo.mul(&lo, Rnd::Up).0 <= 2);
        assert!(hi.mul(&hi, Rnd::Down).0 >= 2);
        assert!(lo.0 < hi.0);
    }
}
