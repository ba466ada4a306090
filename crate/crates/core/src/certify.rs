//! Rigorous min-max certification of a candidate eigenfunction.
//!
//! For test functions `g_k > 0` on `[0,1]`, if `(L g)_k / g_k > 1` everywhere
//! then the dimension is at least `t`; if it is `< 1` everywhere then the
//! dimension is at most `t`. The ratio is enclosed on each sub-interval by a
//! degree-4 Taylor polynomial at the centre plus an order-5 remainder bounded
//! over a (possibly coarser) enclosing interval.

use std::time::Instant;

use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::ball::{decimal_string, Ball};
use crate::error::{Error, Result};
use crate::scalar::{Endpoint, Mp, Real, Rnd};
use crate::subshift::{AllowedWords, ReducedMarkov};
use crate::transfer::{CollocationBasis, EigenPair, ReducedBt};

/// Taylor coefficients kept per jet: orders `0..=ORDER`.
pub const ORDER: usize = 5;
const N: usize = ORDER + 1;

type Jet<E> = [Ball<E>; N];

fn zero_jet<E: Endpoint>(prec: u32) -> Jet<E> {
    std::array::from_fn(|_| Ball::zero(prec))
}

/// One polynomial per essential column class, in monomial form. The
/// coefficients are taken as exact binary numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestFunctionFamily {
    pub classes: Vec<u32>,
    pub coeffs: Vec<Vec<f64>>,
}

impl TestFunctionFamily {
    pub fn constant(classes: Vec<u32>, value: f64) -> Self {
        let coeffs = vec![vec![value]; classes.len()];
        TestFunctionFamily { classes, coeffs }
    }

    /// Rigorous check that every polynomial is positive on `[0,1]`.
    pub fn check_positive<E: Endpoint>(&self, prec: u32) -> Result<()> {
        for (i, c) in self.coeffs.iter().enumerate() {
            let poly: Vec<Ball<E>> = c.iter().map(|&a| Ball::from_f64(a, prec)).collect();
            let mut stack: Vec<(Rational, Rational, u32)> =
                vec![(Rational::from(0), Rational::from(1), 0)];
            while let Some((lo, hi, depth)) = stack.pop() {
                let x = Ball::from_rational(&lo, prec).hull(&Ball::from_rational(&hi, prec));
                if horner(&poly, &x).is_positive() {
                    continue;
                }
                if depth >= 24 {
                    return Err(Error::NotPositive(format!(
                        "candidate not positive on class {}; increase m or precision",
                        self.classes[i]
                    )));
                }
                let mid = Rational::from(&lo + &hi) / 2u32;
                stack.push((lo, mid.clone(), depth + 1));
                stack.push((mid, hi, depth + 1));
            }
        }
        Ok(())
    }
}

fn horner<E: Endpoint>(poly: &[Ball<E>], x: &Ball<E>) -> Ball<E> {
    let mut acc = poly.last().cloned().unwrap_or_else(|| Ball::zero(x.precision_bits()));
    for a in poly.iter().rev().skip(1) {
        acc = acc.mul_ball(x).add_ball(a);
    }
    acc
}

/// Taylor coefficients `g^{(k)}(x)/k!`, `k = 0..=ORDER`, by repeated
/// synthetic division.
fn taylor_shift<E: Endpoint>(poly: &[Ball<E>], x: &Ball<E>, out: &mut Jet<E>, work: &mut Vec<Ball<E>>) {
    work.clear();
    work.extend_from_slice(poly);
    let prec = x.precision_bits();
    for o in out.iter_mut() {
        if work.is_empty() {
            *o = Ball::zero(prec);
            continue;
        }
        let mut acc = work.last().unwrap().clone();
        for i in (0..work.len() - 1).rev() {
            let next = acc.mul_ball(x).add_ball(&work[i]);
            work[i + 1] = acc;
            acc = next;
        }
        *o = acc;
        work.remove(0);
    }
}

/// Lift the collocation eigenvector to interpolating polynomials and check
/// their positivity on `[0,1]`.
pub fn lift_eigvec<T: Real>(
    pair: &EigenPair<T>,
    basis: &CollocationBasis<T>,
    bt: &ReducedBt<T>,
) -> Result<TestFunctionFamily> {
    let m = basis.m;
    if pair.vector.len() != bt.dim() || bt.m != m {
        return Err(Error::Invalid("eigenvector does not match the basis".into()));
    }
    let nodes: Vec<f64> = basis.nodes.iter().map(|x| x.to_f64().unwrap()).collect();
    let coeffs = pair
        .vector
        .chunks(m)
        .map(|v| {
            let v: Vec<f64> = v.iter().map(|x| x.to_f64().unwrap()).collect();
            interpolate(&nodes, &v)
        })
        .collect();
    let tf = TestFunctionFamily {
        classes: bt.classes.clone(),
        coeffs,
    };
    tf.check_positive::<f64>(53)?;
    Ok(tf)
}

/// Monomial coefficients of the interpolant through `(nodes, values)`,
/// computed with 256-bit Newton divided differences and rounded to `f64`.
pub fn interpolate(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    const PREC: u32 = 256;
    let n = nodes.len();
    let x: Vec<rug::Float> = nodes.iter().map(|&v| rug::Float::with_val(PREC, v)).collect();
    let mut dd: Vec<rug::Float> = values.iter().map(|&v| rug::Float::with_val(PREC, v)).collect();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = rug::Float::with_val(PREC, &dd[i] - &dd[i - 1]);
            let den = rug::Float::with_val(PREC, &x[i] - &x[i - j]);
            dd[i] = num / den;
        }
    }
    // expand the Newton form by Horner from the top coefficient
    let mut poly = vec![rug::Float::with_val(PREC, 0); n];
    for i in (0..n).rev() {
        let mut next = vec![rug::Float::with_val(PREC, 0); n];
        for d in 0..n - 1 {
            next[d + 1] += &poly[d];
            next[d] -= rug::Float::with_val(PREC, &poly[d] * &x[i]);
        }
        next[0] += &dd[i];
        poly = next;
    }
    poly.iter().map(|c| c.to_f64()).collect()
}

struct PreparedWord<E: Endpoint> {
    pp: Ball<E>,
    pc: Ball<E>,
    qp: Ball<E>,
    qc: Ball<E>,
    /// `p_prev q_cur − p_cur q_prev = −1`.
    det_negative: bool,
    /// Index into the test family of the word's column class.
    g: u32,
    row: u32,
}

/// Images `(L g)_k` of a test family, evaluated lazily as sums over words.
pub struct ImageFamily<'a, E: Endpoint> {
    tf: &'a TestFunctionFamily,
    prec: u32,
    words: Vec<PreparedWord<E>>,
    k_rows: usize,
    /// For each class of the family, the row classes that may precede it.
    rows_for: Vec<Vec<u32>>,
    /// `binom(−2t, j)`.
    binom: Jet<E>,
    neg_two_t: Ball<E>,
    g_polys: Vec<Vec<Ball<E>>>,
}

fn continuants_exact(digits: &[u8]) -> [rug::Integer; 4] {
    let (mut pp, mut pc, mut qp, mut qc) = (
        rug::Integer::from(1),
        rug::Integer::from(0),
        rug::Integer::from(0),
        rug::Integer::from(1),
    );
    for &a in digits {
        let np = rug::Integer::from(&pc * a) + &pp;
        let nq = rug::Integer::from(&qc * a) + &qp;
        pp = std::mem::replace(&mut pc, np);
        qp = std::mem::replace(&mut qc, nq);
    }
    [pp, pc, qp, qc]
}

impl<'a, E: Endpoint> ImageFamily<'a, E> {
    pub fn new(
        tf: &'a TestFunctionFamily,
        t: &Rational,
        rm: &ReducedMarkov,
        a: &AllowedWords,
        prec: u32,
    ) -> Result<Self> {
        if a.provenance != rm.provenance || a.len() != rm.row_map.len() {
            return Err(Error::Provenance("matrix built from another word list".into()));
        }
        let mut pos = vec![u32::MAX; rm.k];
        for (i, &c) in tf.classes.iter().enumerate() {
            pos[c as usize] = i as u32;
        }
        let mut words = Vec::new();
        let mut digits = vec![0u8; a.n];
        for w in 0..a.len() {
            let g = pos[rm.col_map[w] as usize];
            if g == u32::MAX {
                continue;
            }
            a.digits_into(w, &mut digits);
            let [pp, pc, qp, qc] = continuants_exact(&digits);
            let det = rug::Integer::from(&pp * &qc) - rug::Integer::from(&pc * &qp);
            words.push(PreparedWord {
                pp: Ball::from_integer(&pp, prec),
                pc: Ball::from_integer(&pc, prec),
                qp: Ball::from_integer(&qp, prec),
                qc: Ball::from_integer(&qc, prec),
                det_negative: det < 0,
                g,
                row: rm.row_map[w],
            });
        }
        let rows_for = tf
            .classes
            .iter()
            .map(|&k| (0..rm.k_rows as u32).filter(|&r| rm.mhat(r as usize, k as usize)).collect())
            .collect();
        let tb: Ball<E> = Ball::from_rational(t, prec);
        let neg_two_t = tb.mul_ball(&Ball::from_i64(-2, prec));
        let mut binom = zero_jet::<E>(prec);
        binom[0] = Ball::one(prec);
        for j in 1..N {
            let f = neg_two_t.sub_ball(&Ball::from_i64(j as i64 - 1, prec));
            binom[j] = binom[j - 1].mul_ball(&f).div_ball(&Ball::from_i64(j as i64, prec));
        }
        let g_polys = tf
            .coeffs
            .iter()
            .map(|c| c.iter().map(|&v| Ball::from_f64(v, prec)).collect())
            .collect();
        Ok(ImageFamily {
            tf,
            prec,
            words,
            k_rows: rm.k_rows,
            rows_for,
            binom,
            neg_two_t,
            g_polys,
        })
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    /// Add the jet of `|T_a'|^t g(T_a)` at `x` into `out`.
    fn add_word_jet(&self, w: &PreparedWord<E>, x: &Ball<E>, out: &mut Jet<E>, gt: &mut Jet<E>, work: &mut Vec<Ball<E>>) {
        let d = w.qc.add_ball(&w.qp.mul_ball(x));
        let inv_d = d.recip();
        let w0 = self.neg_two_t.mul_ball(&d.ln()).exp();
        let u = w.qp.mul_ball(&inv_d);
        let r = u.neg_ball();
        let t0 = w.pc.add_ball(&w.pp.mul_ball(x)).mul_ball(&inv_d);
        let mut t1 = inv_d.sqr();
        if w.det_negative {
            t1 = t1.neg_ball();
        }
        taylor_shift(&self.g_polys[w.g as usize], &t0, gt, work);
        // weight series W_j = D^{-2t} binom(-2t, j) u^j
        let mut wj: Jet<E> = zero_jet(self.prec);
        let mut upow = Ball::one(self.prec);
        for j in 0..N {
            wj[j] = w0.mul_ball(&self.binom[j]).mul_ball(&upow);
            upow = upow.mul_ball(&u);
        }
        // composed series G_j = Σ_k gt_k T1^k r^{j-k} C(j-1, k-1)
        let mut t1p: Jet<E> = zero_jet(self.prec);
        let mut rp: Jet<E> = zero_jet(self.prec);
        t1p[0] = Ball::one(self.prec);
        rp[0] = Ball::one(self.prec);
        for j in 1..N {
            t1p[j] = t1p[j - 1].mul_ball(&t1);
            rp[j] = rp[j - 1].mul_ball(&r);
        }
        let mut gj: Jet<E> = zero_jet(self.prec);
        gj[0] = gt[0].clone();
        for j in 1..N {
            let mut s = Ball::zero(self.prec);
            for k in 1..=j {
                let term = gt[k].mul_ball(&t1p[k]).mul_ball(&rp[j - k]);
                let cb = BINOM[j - 1][k - 1];
                let term = if cb == 1 { term } else { term.mul_ball(&Ball::from_i64(cb, self.prec)) };
                s = s.add_ball(&term);
            }
            gj[j] = s;
        }
        for j in 0..N {
            let mut s = out[j].clone();
            for i in 0..=j {
                s = s.add_ball(&wj[i].mul_ball(&gj[j - i]));
            }
            out[j] = s;
        }
    }

    /// Taylor coefficients of `(L g)_k` at `x` for every class of the family.
    pub fn jets(&self, x: &Ball<E>) -> Vec<Jet<E>> {
        let mut h: Vec<Jet<E>> = (0..self.k_rows).map(|_| zero_jet(self.prec)).collect();
        let mut gt = zero_jet(self.prec);
        let mut work = Vec::new();
        for w in &self.words {
            self.add_word_jet(w, x, &mut h[w.row as usize], &mut gt, &mut work);
        }
        self.rows_for
            .iter()
            .map(|rows| {
                let mut q = zero_jet(self.prec);
                for &r in rows {
                    for j in 0..N {
                        q[j] = q[j].add_ball(&h[r as usize][j]);
                    }
                }
                q
            })
            .collect()
    }

    /// Values `(L g)_k(x)`.
    pub fn eval(&self, x: &Ball<E>) -> Vec<Ball<E>> {
        self.jets(x).into_iter().map(|j| j[0].clone()).collect()
    }

    /// Taylor coefficients of the test function of family index `i` at `x`.
    pub fn test_jet(&self, i: usize, x: &Ball<E>) -> Jet<E> {
        let mut out = zero_jet(self.prec);
        taylor_shift(&self.g_polys[i], x, &mut out, &mut Vec::new());
        out
    }

    pub fn family(&self) -> &TestFunctionFamily {
        self.tf
    }
}

/// `C(j, k)` for `j, k < N`.
const BINOM: [[i64; N]; N] = {
    let mut t = [[0i64; N]; N];
    let mut j = 0;
    while j < N {
        t[j][0] = 1;
        let mut k = 1;
        while k <= j {
            t[j][k] = t[j - 1][k - 1] + if k < j { t[j - 1][k] } else { 0 };
            k += 1;
        }
        j += 1;
    }
    t
};

/// Build the family of images for a test family at exponent `t`.
pub fn apply_operator<'a, E: Endpoint>(
    tf: &'a TestFunctionFamily,
    t: &Rational,
    rm: &ReducedMarkov,
    a: &AllowedWords,
    prec: u32,
) -> Result<ImageFamily<'a, E>> {
    ImageFamily::new(tf, t, rm, a, prec)
}

fn series_div<E: Endpoint>(num: &Jet<E>, den: &Jet<E>) -> Jet<E> {
    let prec = num[0].precision_bits();
    let mut q = zero_jet::<E>(prec);
    for j in 0..N {
        let mut s = num[j].clone();
        for i in 1..=j {
            s = s.sub_ball(&den[i].mul_ball(&q[j - i]));
        }
        q[j] = s.div_ball(&den[0]);
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    /// Ratio bounded below by 1: dimension ≥ t.
    Lower,
    /// Ratio bounded above by 1: dimension ≤ t.
    Upper,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionCertificate {
    /// Exact decimal.
    pub t: String,
    pub direction: Direction,
    /// Lower ratio bound, rounded down.
    pub ratio_lo: String,
    /// Upper ratio bound, rounded up.
    pub ratio_hi: String,
    pub partition_count: usize,
    pub precision_bits: u32,
    pub classes: usize,
    pub words: usize,
    pub provenance: String,
    pub elapsed_secs: f64,
    #[serde(default)]
    pub escalations: Vec<String>,
    #[serde(skip)]
    pub ratio: (f64, f64),
}

/// Exact decimal expansion of a rational with denominator `2^a 5^b`, else a
/// 30-digit rounding.
pub fn rational_decimal(q: &Rational) -> String {
    let mut den = q.denom().clone();
    let mut digits = 0usize;
    while den.is_divisible_u(10) {
        den /= 10u32;
        digits += 1;
    }
    let mut d2 = den.clone();
    while d2.is_divisible_u(2) || d2.is_divisible_u(5) {
        if d2.is_divisible_u(2) {
            d2 /= 2u32;
        } else {
            d2 /= 5u32;
        }
        digits += 1;
    }
    if d2 != 1 {
        let f = rug::Float::with_val(256, q);
        return decimal_string(&f, 30, Rnd::Down);
    }
    let scale = rug::Integer::from(rug::Integer::u_pow_u(10, digits as u32));
    let n = rug::Integer::from(q.numer() * &scale) / q.denom();
    let neg = n < 0;
    let s = n.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits + 1);
    let (ip, fp) = s.split_at(s.len() - digits);
    let body = if digits == 0 { ip.to_string() } else { format!("{ip}.{fp}") };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub partition: usize,
    pub precision: u32,
    /// Double the partition, then add 32 bits, before reporting UNDECIDED.
    pub escalate: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            partition: 256,
            precision: 53,
            escalate: true,
        }
    }
}

/// Enclose `(L g)_k / g_k` over `[0,1]` for all classes.
pub fn ratio_bounds<E: Endpoint>(img: &ImageFamily<'_, E>, partition: usize) -> Result<Ball<E>> {
    if partition < 1 {
        return Err(Error::Invalid("partition must be positive".into()));
    }
    let prec = img.prec;
    // remainder bounds over groups of up to 8 sub-intervals
    let group = [8usize, 4, 2, 1].into_iter().find(|g| partition % g == 0).unwrap();
    let coarse = partition / group;
    let p_ball = |num: usize, den: usize| Ball::<E>::from_ratio(num as i64, den as i64, prec);
    let rem: Vec<Vec<Ball<E>>> = (0..coarse)
        .into_par_iter()
        .map(|c| {
            let x = p_ball(c, coarse).hull(&p_ball(c + 1, coarse));
            let q = img.jets(&x);
            q.iter()
                .enumerate()
                .map(|(i, qj)| series_div(qj, &img.test_jet(i, &x))[ORDER].clone())
                .collect()
        })
        .collect();
    let h = p_ball(1, 2 * partition).hi;
    let hp: Vec<Ball<E>> = (0..N).map(|j| Ball::sym_pow(&h, j as u32)).collect();
    let parts: Vec<Ball<E>> = (0..partition)
        .into_par_iter()
        .map(|p| {
            let c = p_ball(2 * p + 1, 2 * partition);
            let q = img.jets(&c);
            let mut acc: Option<Ball<E>> = None;
            for (i, qj) in q.iter().enumerate() {
                let rho = series_div(qj, &img.test_jet(i, &c));
                let mut range = rho[0].clone();
                for j in 1..ORDER {
                    range = range.add_ball(&rho[j].mul_ball(&hp[j]));
                }
                range = range.add_ball(&rem[p / group][i].mul_ball(&hp[ORDER]));
                acc = Some(match acc {
                    None => range,
                    Some(a) => a.hull(&range),
                });
            }
            acc.unwrap_or_else(|| Ball::entire(prec))
        })
        .collect();
    Ok(parts
        .into_iter()
        .reduce(|a, b| a.hull(&b))
        .unwrap_or_else(|| Ball::entire(prec)))
}

/// One certification attempt with a fixed partition and endpoint type.
pub fn certify_once<E: Endpoint>(
    tf: &TestFunctionFamily,
    t: &Rational,
    rm: &ReducedMarkov,
    a: &AllowedWords,
    partition: usize,
    prec: u32,
) -> Result<DimensionCertificate> {
    let start = Instant::now();
    tf.check_positive::<E>(prec)?;
    let img = ImageFamily::<E>::new(tf, t, rm, a, prec)?;
    let r = ratio_bounds(&img, partition)?;
    let one = Ball::<E>::one(prec);
    let direction = if r.definitely_gt(&one) {
        Direction::Lower
    } else if r.definitely_lt(&one) {
        Direction::Upper
    } else {
        Direction::Undecided
    };
    let r64: Ball<f64> = r.convert(53);
    Ok(DimensionCertificate {
        t: rational_decimal(t),
        direction,
        ratio_lo: r.lo_string(12),
        ratio_hi: r.hi_string(12),
        partition_count: partition,
        precision_bits: r.precision_bits(),
        classes: tf.classes.len(),
        words: img.num_words(),
        provenance: rm.provenance.clone(),
        elapsed_secs: start.elapsed().as_secs_f64(),
        escalations: Vec::new(),
        ratio: (r64.lo, r64.hi),
    })
}

/// Certify with the escalation policy of `opts`. Precisions above 53 bits
/// switch to multiprecision endpoints.
pub fn certify(
    tf: &TestFunctionFamily,
    t: &Rational,
    rm: &ReducedMarkov,
    a: &AllowedWords,
    opts: &CertifyOptions,
) -> Result<DimensionCertificate> {
    if opts.partition < 16 {
        return Err(Error::Invalid("partition count must be at least 16".into()));
    }
    let run = |p: usize, prec: u32| {
        if prec <= 53 {
            certify_once::<f64>(tf, t, rm, a, p, 53)
        } else {
            certify_once::<Mp>(tf, t, rm, a, p, prec)
        }
    };
    let mut cert = run(opts.partition, opts.precision)?;
    if cert.direction != Direction::Undecided || !opts.escalate {
        return Ok(cert);
    }
    let mut log = vec![format!("P={} bits={}: undecided", opts.partition, cert.precision_bits)];
    let p2 = opts.partition * 2;
    cert = run(p2, opts.precision)?;
    if cert.direction == Direction::Undecided {
        log.push(format!("P={p2} bits={}: undecided", cert.precision_bits));
        let prec2 = opts.precision.max(53) + 32;
        cert = run(p2, prec2)?;
        if cert.direction == Direction::Undecided {
            log.push(format!("P={p2} bits={prec2}: undecided"));
        }
    }
    cert.escalations = log;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subshift::{allowed_words, reduced_markov_from, ForbiddenSet};

    #[test]
    fn interpolation_is_accurate_at_high_degree() {
        let b = crate::transfer::chebyshev_basis::<f64>(24).unwrap();
        let f = |x: f64| 1.0 / (1.0 + x).powi(2);
        let vals: Vec<f64> = b.nodes.iter().map(|&x| f(x)).collect();
        let c = interpolate(&b.nodes, &vals);
        for &x in &b.nodes {
            let p = c.iter().rev().fold(0.0, |s, &a| s * x + a);
            assert!((p - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(BINOM[4], [1, 4, 6, 4, 1, 0]);
        assert_eq!(BINOM[5][2], 10);
    }

    #[test]
    fn decimals() {
        assert_eq!(rational_decimal(&Rational::from((50001, 100000))), "0.50001");
        assert_eq!(rational_decimal(&Rational::from((1, 8))), "0.125");
        assert_eq!(rational_decimal(&Rational::from(3)), "3");
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        // g = 1 + 2x + 3x^2 at x = 2: g = 17, g' = 14, g''/2 = 3
        let poly: Vec<Ball<f64>> = [1.0, 2.0, 3.0].iter().map(|&v| Ball::from_f64(v, 53)).collect();
        let mut out = zero_jet::<f64>(53);
        taylor_shift(&poly, &Ball::from_f64(2.0, 53), &mut out, &mut Vec::new());
        let got: Vec<f64> = out.iter().map(|b| b.mid_f64()).collect();
        assert_eq!(got, vec![17.0, 14.0, 3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gauss_sum_at_zero() {
        let f = ForbiddenSet::empty(2).unwrap();
        let a = allowed_words(&f, 1).unwrap();
        let rm = reduced_markov_from(&f, &a).unwrap();
        let tf = TestFunctionFamily::constant(vec![0], 1.0);
        let img = apply_operator::<f64>(&tf, &Rational::from(1), &rm, &a, 53).unwrap();
        let q = img.eval(&Ball::zero(53));
        assert!(q[0].contains_rational(&Rational::from((5, 4))));
        assert!(q[0].width_f64() < 1e-14);
    }

    #[test]
    fn jets_match_finite_differences() {
        let f = ForbiddenSet::new(2, &["121".parse().unwrap()], true).unwrap();
        let a = allowed_words(&f, 3).unwrap();
        let rm = reduced_markov_from(&f, &a).unwrap();
        let tf = TestFunctionFamily {
            classes: rm.essential.clone(),
            coeffs: rm.essential.iter().map(|&c| vec![1.0 + c as f64, 0.25, -0.1]).collect(),
        };
        let t = Rational::from((3, 7));
        let img = apply_operator::<f64>(&tf, &t, &rm, &a, 53).unwrap();
        let x0 = 0.4;
        let jets = img.jets(&Ball::from_f64(x0, 53));
        let eps = 1e-3;
        let vals: Vec<Vec<f64>> = [-2.0, -1.0, 1.0, 2.0]
            .iter()
            .map(|s| img.eval(&Ball::from_f64(x0 + s * eps, 53)).iter().map(|b| b.mid_f64()).collect())
            .collect();
        for k in 0..jets.len() {
            let d1 = (vals[2][k] - vals[1][k]) / (2.0 * eps);
            let d2 = (vals[2][k] + vals[1][k] - 2.0 * jets[k][0].mid_f64()) / (eps * eps) / 2.0;
            let d3 = (vals[3][k] - 2.0 * vals[2][k] + 2.0 * vals[1][k] - vals[0][k]) / (2.0 * eps.powi(3)) / 6.0;
            assert!((jets[k][1].mid_f64() - d1).abs() < 1e-5);
            assert!((jets[k][2].mid_f64() - d2).abs() < 1e-4);
            assert!((jets[k][3].mid_f64() - d3).abs() < 1e-2);
        }
    }
}
