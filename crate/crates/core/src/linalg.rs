//! Small exact linear algebra over Z and Q used throughout the crate.
//!
//! Matrices are stored row-major in flat vectors. Everything here is exact;
//! the only floating-point code lives in the enumeration kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Determinant and leading principal minors by fraction-free (Bareiss)
/// elimination without pivoting. A zero leading minor stops elimination;
/// the remaining minors are reported as zero.
pub fn bareiss_leading_minors(n: usize, a: &[i64]) -> Vec<BigInt> {
    let mut m: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
    let mut minors = Vec::with_capacity(n);
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = m[k * n + k].clone();
        minors.push(pivot.clone());
        if pivot.is_zero() {
            minors.resize(n, BigInt::zero());
            return minors;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i * n + j] * &pivot - &m[i * n + k] * &m[k * n + j];
                m[i * n + j] = v / &prev;
            }
        }
        prev = pivot;
    }
    minors
}

/// Exact determinant with pivoting, over BigInt.
pub fn det_bigint(n: usize, a: &[BigInt]) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.to_vec();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n {
        if m[k * n + k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                m.swap(k * n + j, r * n + j);
            }
            sign = -sign;
        }
        let pivot = m[k * n + k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i * n + j] * &pivot - &m[i * n + k] * &m[k * n + j];
                m[i * n + j] = v / &prev;
            }
        }
        prev = pivot;
    }
    sign * m[n * n - 1].clone()
}

pub fn det_i64(n: usize, a: &[i64]) -> BigInt {
    let big: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
    det_bigint(n, &big)
}

/// Determinant of a rational matrix by Gaussian elimination.
pub fn det_rational(n: usize, a: &[BigRational]) -> BigRational {
    let mut m = a.to_vec();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(r) = (k..n).find(|&r| !m[r * n + k].is_zero()) else {
            return BigRational::zero();
        };
        if r != k {
            for j in 0..n {
                m.swap(k * n + j, r * n + j);
            }
            det = -det;
        }
        let pivot = m[k * n + k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if m[i * n + k].is_zero() {
                continue;
            }
            let f = &m[i * n + k] / &pivot;
            for j in k..n {
                let v = &m[k * n + j] * &f;
                m[i * n + j] -= v;
            }
        }
    }
    det
}

/// Inverse of an integer matrix over Q. Returns `None` when singular.
pub fn inverse_rational(n: usize, a: &[i64]) -> Option<Vec<BigRational>> {
    let mut m: Vec<BigRational> = a.iter().map(|&x| BigRational::from_integer(x.into())).collect();
    let mut inv: Vec<BigRational> = (0..n * n)
        .map(|i| if i / n == i % n { BigRational::one() } else { BigRational::zero() })
        .collect();
    for k in 0..n {
        let r = (k..n).find(|&r| !m[r * n + k].is_zero())?;
        if r != k {
            for j in 0..n {
                m.swap(k * n + j, r * n + j);
                inv.swap(k * n + j, r * n + j);
            }
        }
        let pivot = m[k * n + k].clone();
        for j in 0..n {
            m[k * n + j] /= &pivot;
            inv[k * n + j] /= &pivot;
        }
        for i in 0..n {
            if i == k || m[i * n + k].is_zero() {
                continue;
            }
            let f = m[i * n + k].clone();
            for j in 0..n {
                let a = &m[k * n + j] * &f;
                m[i * n + j] -= a;
                let b = &inv[k * n + j] * &f;
                inv[i * n + j] -= b;
            }
        }
    }
    Some(inv)
}

/// Inverse of a unimodular integer matrix.
pub fn inverse_unimodular(n: usize, a: &[i64]) -> Option<Vec<i64>> {
    let inv = inverse_rational(n, a)?;
    inv.iter()
        .map(|q| if q.is_integer() { q.to_integer().to_i64() } else { None })
        .collect()
}

pub fn matmul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s: i128 = 0;
            for k in 0..n {
                s += a[i * n + k] as i128 * b[k * n + j] as i128;
            }
            out[i * n + j] = i64::try_from(s).expect("matrix product overflow");
        }
    }
    out
}

pub fn transpose(n: usize, a: &[i64]) -> Vec<i64> {
    let mut t = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// `Uᵀ · A · U` for square `n×n` matrices.
pub fn congruence(n: usize, a: &[i64], u: &[i64]) -> Vec<i64> {
    let au = matmul(n, a, u);
    matmul(n, &transpose(n, u), &au)
}

pub fn identity(n: usize) -> Vec<i64> {
    (0..n * n).map(|i| i64::from(i / n == i % n)).collect()
}

/// Extended Euclid on i128: returns (g, x, y) with a·x + b·y = g ≥ 0.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Unimodular `m×m` matrix `V` whose first column is the primitive vector `c`.
pub fn unimodular_with_first_column(c: &[i64]) -> Vec<i64> {
    primitive_completion(c).0
}

/// `(V, V⁻¹)` where `V` is unimodular with first column `c` (primitive).
pub fn primitive_completion(c: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let m = c.len();
    let mut w: Vec<i128> = c.iter().map(|&x| x as i128).collect();
    // Row operations E with E·c = ±e1, accumulated into `e`; V = E⁻¹ is
    // accumulated as the matching column operations in `v`.
    let mut v: Vec<i128> = identity(m).into_iter().map(|x| x as i128).collect();
    let mut e = v.clone();
    for i in (1..m).rev() {
        let (a, b) = (w[i - 1], w[i]);
        if b == 0 {
            continue;
        }
        let (g, x, y) = ext_gcd(a, b);
        let (ag, bg) = (a / g, b / g);
        // E = [[x, y], [-bg, ag]] on rows i-1, i; E⁻¹ = [[ag, -y], [bg, x]].
        w[i - 1] = g;
        w[i] = 0;
        for r in 0..m {
            let p = v[r * m + i - 1];
            let q = v[r * m + i];
            v[r * m + i - 1] = p * ag + q * bg;
            v[r * m + i] = -p * y + q * x;
        }
        for col in 0..m {
            let p = e[(i - 1) * m + col];
            let q = e[i * m + col];
            e[(i - 1) * m + col] = x * p + y * q;
            e[i * m + col] = -bg * p + ag * q;
        }
    }
    debug_assert!(w[0].abs() == 1, "vector is not primitive");
    if w[0] < 0 {
        for r in 0..m {
            v[r * m] = -v[r * m];
        }
        for col in 0..m {
            e[col] = -e[col];
        }
    }
    let conv = |x: Vec<i128>| x.into_iter().map(|y| i64::try_from(y).expect("overflow")).collect();
    (conv(v), conv(e))
}

/// Row-style Hermite reduction of integer generators spanning a full-rank
/// lattice in Zⁿ. Returns `n` basis vectors (rows).
pub fn lattice_basis(n: usize, gens: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let mut rows: Vec<Vec<i128>> = gens.to_vec();
    let mut basis = Vec::with_capacity(n);
    for col in 0..n {
        // gcd-combine all remaining rows on this column into a single pivot
        let mut pivot: Option<Vec<i128>> = None;
        let mut rest = Vec::with_capacity(rows.len());
        for r in rows.into_iter() {
            if r[col] == 0 {
                rest.push(r);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(r),
                Some(p) => {
                    let (g, x, y) = ext_gcd(p[col], r[col]);
                    let (pa, rb) = (p[col] / g, r[col] / g);
                    let new_p: Vec<i128> = (0..n).map(|j| x * p[j] + y * r[j]).collect();
                    let new_r: Vec<i128> = (0..n).map(|j| rb * p[j] - pa * r[j]).collect();
                    debug_assert_eq!(new_r[col], 0);
                    rest.push(new_r);
                    pivot = Some(new_p);
                }
            }
        }
        let p = pivot.expect("generators do not span a full-rank lattice");
        basis.push(p);
        rows = rest.into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
    }
    basis
}

/// Saturated basis of the integer kernel `{x ∈ Z^N : M·x = 0}` for an
/// `m×N` integer matrix, via unimodular column operations.
pub fn integer_kernel(m: usize, ncols: usize, mat: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut a = mat.to_vec();
    let mut v: Vec<BigInt> =
        (0..ncols * ncols).map(|i| BigInt::from(i64::from(i / ncols == i % ncols))).collect();
    let mut pivot_col = 0usize;
    for row in 0..m {
        if pivot_col >= ncols {
            break;
        }
        loop {
            // pick the nonzero entry of smallest magnitude in this row at or after pivot_col
            let best = (pivot_col..ncols)
                .filter(|&c| !a[row * ncols + c].is_zero())
                .min_by(|&x, &y| a[row * ncols + x].abs().cmp(&a[row * ncols + y].abs()));
            let Some(best) = best else { break };
            swap_cols(&mut a, m, ncols, pivot_col, best);
            swap_cols(&mut v, ncols, ncols, pivot_col, best);
            let p = a[row * ncols + pivot_col].clone();
            let mut done = true;
            for c in pivot_col + 1..ncols {
                let e = a[row * ncols + c].clone();
                if e.is_zero() {
                    continue;
                }
                let q = e.div_floor(&p);
                if !q.is_zero() {
                    sub_col(&mut a, m, ncols, c, pivot_col, &q);
                    sub_col(&mut v, ncols, ncols, c, pivot_col, &q);
                }
                if !a[row * ncols + c].is_zero() {
                    done = false;
                }
            }
            if done {
                pivot_col += 1;
                break;
            }
        }
    }
    (pivot_col..ncols).map(|c| (0..ncols).map(|r| v[r * ncols + c].clone()).collect()).collect()
}

fn swap_cols(a: &mut [BigInt], rows: usize, ncols: usize, i: usize, j: usize) {
    if i == j {
        return;
    }
    for r in 0..rows {
        a.swap(r * ncols + i, r * ncols + j);
    }
}

fn sub_col(a: &mut [BigInt], rows: usize, ncols: usize, target: usize, src: usize, q: &BigInt) {
    for r in 0..rows {
        let d = &a[r * ncols + src] * q;
        a[r * ncols + target] -= d;
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(x: &BigInt, p: u64) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

pub fn valuation_i64(x: i64, p: u64) -> u32 {
    valuation(&BigInt::from(x), p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of |x| (trial division; inputs are desk-sized).
pub fn prime_factors(x: &BigInt) -> Vec<u64> {
    let mut x = x.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while BigInt::from(d) * BigInt::from(d) <= x {
        let bd = BigInt::from(d);
        if (&x % &bd).is_zero() {
            out.push(d);
            while (&x % &bd).is_zero() {
                x /= &bd;
            }
        }
        d += 1;
    }
    if x > BigInt::one() {
        out.push(x.to_u64().expect("prime factor exceeds u64"));
    }
    out
}

/// Squarefree kernel of a nonzero integer, keeping the sign.
pub fn squarefree_part(x: &BigInt) -> BigInt {
    let mut rest = x.abs();
    let mut out = BigInt::one();
    for p in prime_factors(x) {
        let bp = BigInt::from(p);
        let mut e = 0;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e % 2 == 1 {
            out *= &bp;
        }
    }
    if x.is_negative() {
        -out
    } else {
        out
    }
}

pub fn rational_matrix(a: &[i64]) -> Vec<BigRational> {
    a.iter().map(|&x| BigRational::from_integer(x.into())).collect()
}
