//! Chebyshev collocation of the transfer operator.
//!
//! Test functions are indexed by column class: `f_k` lives on the points whose
//! digit expansion starts with a block of column class `k`. The operator is
//!
//! ```text
//! (L f)_k(x) = Σ_a M(a, b_k) |T_a'(x)|^t f_{C(a)}(T_a x)
//! ```
//!
//! summed over allowed blocks `a`. Grouping blocks by `(R(a), C(a))` gives the
//! reduced matrix without ever forming the full one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::subshift::{AllowedWords, ReducedMarkov};

pub const MAX_DEGREE: usize = 64;

#[inline]
fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// Lagrange basis on the Chebyshev nodes `½(1 + cos(π(2k−1)/2m))`.
#[derive(Clone, Debug)]
pub struct CollocationBasis<T> {
    pub m: usize,
    pub nodes: Vec<T>,
    /// Barycentric weights `1/Π_{i≠l}(x_l − x_i)`.
    pub weights: Vec<T>,
    /// `coeffs[l][d]`: coefficient of `x^d` in `p_l`.
    pub coeffs: Vec<Vec<T>>,
}

pub type CollocationBasisF64 = CollocationBasis<f64>;

pub fn chebyshev_basis<T: Real>(m: usize) -> Result<CollocationBasis<T>> {
    if m == 0 || m > MAX_DEGREE {
        return Err(Error::Invalid(format!("degree count {m} outside 1..={MAX_DEGREE}")));
    }
    let pi = T::from_f64(std::f64::consts::PI).unwrap();
    let nodes: Vec<T> = (1..=m)
        .map(|k| {
            let arg = pi * c::<T>((2 * k - 1) as f64) / c::<T>((2 * m) as f64);
            // cos(π/2) is not exactly zero in floating point
            let cs = if 2 * k - 1 == m { T::zero() } else { arg.cos() };
            c::<T>(0.5) * (T::one() + cs)
        })
        .collect();
    let weights: Vec<T> = (0..m)
        .map(|l| {
            let mut prod = T::one();
            for i in (0..m).filter(|&i| i != l) {
                prod = prod * (nodes[l] - nodes[i]);
            }
            T::one() / prod
        })
        .collect();
    let coeffs = (0..m)
        .map(|l| {
            let mut poly = vec![T::one()];
            for i in (0..m).filter(|&i| i != l) {
                let mut next = vec![T::zero(); poly.len() + 1];
                for (d, &a) in poly.iter().enumerate() {
                    next[d + 1] = next[d + 1] + a;
                    next[d] = next[d] - a * nodes[i];
                }
                poly = next;
            }
            poly.into_iter().map(|a| a * weights[l]).collect()
        })
        .collect();
    Ok(CollocationBasis { m, nodes, weights, coeffs })
}

impl<T: Real> CollocationBasis<T> {
    /// All basis values at `y`, written into `out` (length `m`).
    pub fn eval_all(&self, y: T, out: &mut [T]) {
        if let Some(j) = self.nodes.iter().position(|&x| x == y) {
            out.iter_mut().for_each(|o| *o = T::zero());
            out[j] = T::one();
            return;
        }
        let mut den = T::zero();
        for l in 0..self.m {
            let q = self.weights[l] / (y - self.nodes[l]);
            out[l] = q;
            den = den + q;
        }
        out.iter_mut().for_each(|o| *o = *o / den);
    }

    pub fn eval(&self, l: usize, y: T) -> T {
        let mut out = vec![T::zero(); self.m];
        self.eval_all(y, &mut out);
        out[l]
    }

    /// Monomial coefficients of `Σ_l values[l] p_l`.
    pub fn interpolant(&self, values: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.m];
        for (l, &v) in values.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(&self.coeffs[l]) {
                *o = *o + v * a;
            }
        }
        out
    }
}

/// `(p_prev, p_cur, q_prev, q_cur)` of the map `x ↦ (p_cur + p_prev x)/(q_cur + q_prev x)`.
fn moebius<T: Real>(digits: &[u8]) -> (T, T, T, T) {
    let (mut pp, mut pc, mut qp, mut qc) = (T::one(), T::zero(), T::zero(), T::one());
    for &a in digits {
        let a = c::<T>(a as f64);
        (pp, pc) = (pc, a * pc + pp);
        (qp, qc) = (qc, a * qc + qp);
    }
    (pp, pc, qp, qc)
}

/// Block `B(i,l) = |T_w'(x_i)|^t p_l(T_w x_i)`, row-major, added into `out`.
fn add_block<T: Real>(digits: &[u8], t: T, basis: &CollocationBasis<T>, scratch: &mut [T], out: &mut [T]) {
    let m = basis.m;
    let (pp, pc, qp, qc) = moebius::<T>(digits);
    let two_t = c::<T>(2.0) * t;
    for i in 0..m {
        let x = basis.nodes[i];
        let d = qc + qp * x;
        let weight = (-two_t * d.ln()).exp();
        let y = (pc + pp * x) / d;
        basis.eval_all(y, scratch);
        for l in 0..m {
            out[i * m + l] = out[i * m + l] + weight * scratch[l];
        }
    }
}

/// The `m × m` collocation block of one word.
pub fn block<T: Real>(digits: &[u8], t: T, basis: &CollocationBasis<T>) -> Vec<T> {
    let mut out = vec![T::zero(); basis.m * basis.m];
    let mut scratch = vec![T::zero(); basis.m];
    add_block(digits, t, basis, &mut scratch, &mut out);
    out
}

/// The reduced collocation matrix, restricted to `classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBt<T> {
    pub t: T,
    pub m: usize,
    /// Column classes indexing the block rows/columns, in order.
    pub classes: Vec<u32>,
    /// Row-major `(k·m) × (k·m)`; entry `((k,i),(l,j))`.
    pub matrix: Vec<T>,
    pub precision_bits: u32,
    pub provenance: String,
}

pub type ReducedBtF64 = ReducedBt<f64>;

impl<T: Real> ReducedBt<T> {
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.classes.len() * self.m
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.matrix[row * self.dim() + col]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        self.matrix
            .par_chunks(n)
            .map(|row| row.iter().zip(v).fold(T::zero(), |s, (&a, &b)| s + a * b))
            .collect()
    }

    /// Sub-matrix on a subset of the current classes.
    pub fn restrict(&self, classes: &[u32]) -> Result<ReducedBt<T>> {
        let pos: Vec<usize> = classes
            .iter()
            .map(|c| {
                self.classes
                    .iter()
                    .position(|x| x == c)
                    .ok_or_else(|| Error::Invalid(format!("class {c} not present")))
            })
            .collect::<Result<_>>()?;
        let (m, n) = (self.m, self.dim());
        let kn = classes.len() * m;
        let mut matrix = vec![T::zero(); kn * kn];
        for (a, &pa) in pos.iter().enumerate() {
            for i in 0..m {
                for (b, &pb) in pos.iter().enumerate() {
                    let src = (pa * m + i) * n + pb * m;
                    let dst = (a * m + i) * kn + b * m;
                    matrix[dst..dst + m].copy_from_slice(&self.matrix[src..src + m]);
                }
            }
        }
        Ok(ReducedBt {
            t: self.t,
            m,
            classes: classes.to_vec(),
            matrix,
            precision_bits: self.precision_bits,
            provenance: self.provenance.clone(),
        })
    }
}

pub(crate) fn mantissa_bits<T: Real>() -> u32 {
    (-T::epsilon().log2()).to_u32().unwrap_or(0) + 1
}

/// Sum of collocation blocks per `(row class, column class)` pair, in the
/// order of [`ReducedMarkov::occupied_pairs`]. Each pair is summed in word
/// order, so the result does not depend on the thread count.
pub fn pair_sums<T: Real>(
    rm: &ReducedMarkov,
    a: &AllowedWords,
    basis: &CollocationBasis<T>,
    t: T,
) -> Result<(Vec<(u32, u32)>, Vec<Vec<T>>)> {
    if a.provenance != rm.provenance || a.len() != rm.row_map.len() {
        return Err(Error::Provenance("matrix built from another word list".into()));
    }
    let pairs = rm.occupied_pairs();
    let index: std::collections::HashMap<(u32, u32), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); pairs.len()];
    for w in 0..a.len() {
        members[index[&(rm.row_map[w], rm.col_map[w])]].push(w as u32);
    }
    let m = basis.m;
    let sums = members
        .par_iter()
        .map(|ws| {
            let mut acc = vec![T::zero(); m * m];
            let mut scratch = vec![T::zero(); m];
            let mut digits = vec![0u8; a.n];
            for &w in ws {
                a.digits_into(w as usize, &mut digits);
                add_block(&digits, t, basis, &mut scratch, &mut acc);
            }
            acc
        })
        .collect();
    Ok((pairs, sums))
}

/// Assemble the reduced matrix on all `K` column classes:
/// `B̂((k,i),(l,j)) = Σ_r M̂(r,k) Σ_{R(a)=r, C(a)=l} B^a(i,j)`.
pub fn assemble_reduced_bt<T: Real>(
    rm: &ReducedMarkov,
    a: &AllowedWords,
    basis: &CollocationBasis<T>,
    t: T,
) -> Result<ReducedBt<T>> {
    let (pairs, sums) = pair_sums(rm, a, basis, t)?;
    let (k, m) = (rm.k, basis.m);
    let n = k * m;
    let mut matrix = vec![T::zero(); n * n];
    matrix.par_chunks_mut(m * n).enumerate().for_each(|(kk, rows)| {
        for (&(r, l), s) in pairs.iter().zip(&sums) {
            if !rm.mhat(r as usize, kk) {
                continue;
            }
            for i in 0..m {
                let dst = &mut rows[i * n + l as usize * m..i * n + l as usize * m + m];
                for (d, &v) in dst.iter_mut().zip(&s[i * m..i * m + m]) {
                    *d = *d + v;
                }
            }
        }
    });
    Ok(ReducedBt {
        t,
        m,
        classes: (0..k as u32).collect(),
        matrix,
        precision_bits: mantissa_bits::<T>(),
        provenance: format!("{}:m{m}", rm.provenance),
    })
}

/// Leading eigenpair estimate of a reduced matrix.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    /// Midpoint of the Collatz bounds.
    pub eigenvalue: T,
    /// `min_i (B̂v)_i / v_i`.
    pub lambda_lo: T,
    /// `max_i (B̂v)_i / v_i`.
    pub lambda_hi: T,
    /// Sup-norm 1.
    pub vector: Vec<T>,
    /// `‖B̂v − λv‖_∞`.
    pub residual: T,
    pub iterations: usize,
}

pub type EigenPairF64 = EigenPair<f64>;

/// Default stopping tolerance for `T`.
pub fn default_tolerance<T: Real>() -> T {
    T::epsilon() * c::<T>(1000.0)
}

fn sup_normalize<T: Real>(v: &mut [T]) -> T {
    let s = v.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    if s > T::zero() {
        v.iter_mut().for_each(|x| *x = *x / s);
    }
    s
}

/// Power iteration from the all-ones vector.
pub fn leading_eig<T: Real>(bt: &ReducedBt<T>, tol: T, max_iters: usize) -> Result<EigenPair<T>> {
    let n = bt.dim();
    let mut v = vec![T::one(); n];
    let mut diff = T::infinity();
    for it in 1..=max_iters {
        let mut w = bt.mul_vec(&v);
        sup_normalize(&mut w);
        diff = v.iter().zip(&w).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
        v = w;
        if diff < tol {
            let bv = bt.mul_vec(&v);
            let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
            for (&y, &x) in bv.iter().zip(&v) {
                if x <= T::zero() {
                    return Err(Error::NotPositive(format!(
                        "eigenvector entry {x:?} at iteration {it}"
                    )));
                }
                lo = lo.min(y / x);
                hi = hi.max(y / x);
            }
            let lambda = c::<T>(0.5) * (lo + hi);
            let residual = bv
                .iter()
                .zip(&v)
                .fold(T::zero(), |a, (&y, &x)| a.max((y - lambda * x).abs()));
            return Ok(EigenPair {
                eigenvalue: lambda,
                lambda_lo: lo,
                lambda_hi: hi,
                vector: v,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iters: max_iters,
        residual: diff.to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bases() {
        let b1 = chebyshev_basis::<f64>(1).unwrap();
        assert_eq!(b1.nodes, vec![0.5]);
        assert_eq!(b1.coeffs, vec![vec![1.0]]);
        let b2 = chebyshev_basis::<f64>(2).unwrap();
        let s = 2f64.sqrt();
        assert!((b2.nodes[0] - (2.0 + s) / 4.0).abs() < 1e-15);
        assert!((b2.nodes[1] - (2.0 - s) / 4.0).abs() < 1e-15);
        assert!(chebyshev_basis::<f64>(0).is_err());
        assert!(chebyshev_basis::<f64>(65).is_err());
    }

    #[test]
    fn delta_property() {
        for m in [8usize, 16, 32] {
            let b = chebyshev_basis::<f64>(m).unwrap();
            for l in 0..m {
                for k in 0..m {
                    let want = if l == k { 1.0 } else { 0.0 };
                    assert_eq!(b.eval(l, b.nodes[k]), want);
                    if m == 8 {
                        let mono = b.coeffs[l].iter().rev().fold(0.0, |s, &a| s * b.nodes[k] + a);
                        assert!((mono - want).abs() < 1e-11, "l={l} k={k} {mono}");
                    }
                }
            }
        }
    }

    #[test]
    fn one_digit_block() {
        let b = chebyshev_basis::<f64>(1).unwrap();
        let blk = block(&[1], 0.5, &b);
        assert!((blk[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn row_sums() {
        let b = chebyshev_basis::<f64>(6).unwrap();
        let w = [1u8, 2, 2, 1, 1];
        let (_, _, qp, qc) = moebius::<f64>(&w);
        let b0 = block(&w, 0.0, &b);
        let b1 = block(&w, 1.0, &b);
        for i in 0..6 {
            let s0: f64 = b0[i * 6..i * 6 + 6].iter().sum();
            let s1: f64 = b1[i * 6..i * 6 + 6].iter().sum();
            let d = qc + qp * b.nodes[i];
            assert!((s0 - 1.0).abs() < 1e-12);
            assert!((s1 - 1.0 / (d * d)).abs() < 1e-12);
        }
    }
}
