//! Discriminant of the homogeneous set attached to SO(Q): a saturated
//! integral basis of so(Q), its primitive Plücker vector, and its norm.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::form::QuadraticForm;
use crate::linalg::{det_bigint, det_rational, integer_kernel, inverse_rational, valuation};

pub const OMITTED_FACTOR_NOTE: &str =
    "global factors D(H)/E(H) (local volume constants and the Euler product of L-values) are not included";

/// Largest rank for which the Plücker vector is written out coordinate by coordinate.
pub const MAX_PLUECKER_DIM: usize = 4;

/// Saturated Z-basis of `{X ∈ M_n(Z) : XᵀA + AX = 0}`; each matrix is row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieBasis {
    pub n: usize,
    pub r: usize,
    pub basis: Vec<Vec<i64>>,
    /// Elementary divisors of the `r × n²` coordinate matrix (all 1 when saturated).
    pub elementary_divisors: Vec<String>,
}

impl LieBasis {
    pub fn is_saturated(&self) -> bool {
        self.elementary_divisors.iter().all(|d| d == "1")
    }

    fn coords(&self) -> Vec<BigInt> {
        self.basis.iter().flatten().map(|&x| BigInt::from(x)).collect()
    }

    /// Replaces the basis by `W·basis` for an integer matrix `W` (row-major r×r).
    pub fn recombine(&self, w: &[i64]) -> LieBasis {
        let (r, nn) = (self.r, self.n * self.n);
        let basis = (0..r)
            .map(|i| (0..nn).map(|k| (0..r).map(|j| w[i * r + j] * self.basis[j][k]).sum()).collect())
            .collect();
        LieBasis { basis, ..self.clone() }
    }
}

/// Elementary divisors of an integer matrix by Smith reduction.
pub fn elementary_divisors(rows: usize, cols: usize, mat: &[BigInt]) -> Vec<BigInt> {
    let mut a = mat.to_vec();
    let at = |i: usize, j: usize| i * cols + j;
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| !a[at(i, j)].is_zero())
                .min_by(|&(i, j), &(k, l)| a[at(i, j)].abs().cmp(&a[at(k, l)].abs()));
            let Some((pi, pj)) = pivot else { return out };
            for j in 0..cols {
                a.swap(at(t, j), at(pi, j));
            }
            for i in 0..rows {
                a.swap(at(i, t), at(i, pj));
            }
            let p = a[at(t, t)].clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[at(i, t)].div_floor(&p);
                for j in t..cols {
                    let d = &a[at(t, j)] * &q;
                    a[at(i, j)] -= d;
                }
                clean &= a[at(i, t)].is_zero();
            }
            for j in t + 1..cols {
                let q = a[at(t, j)].div_floor(&p);
                for i in t..rows {
                    let d = &a[at(i, t)] * &q;
                    a[at(i, j)] -= d;
                }
                clean &= a[at(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let stray = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !a[at(i, j)].is_multiple_of(&p));
            match stray {
                Some((i, _)) => {
                    for j in t..cols {
                        let v = a[at(i, j)].clone();
                        a[at(t, j)] += v;
                    }
                }
                None => {
                    out.push(p.abs());
                    break;
                }
            }
        }
    }
    out
}

/// Saturated integral basis of so(Q).
pub fn so_lie_basis(q: &QuadraticForm) -> Result<LieBasis> {
    let n = q.dim();
    let nn = n * n;
    // equations (AX)_{ij} + (AX)_{ji} = 0 for i ≤ j, unknowns X_{kl} at k·n + l
    let mut eqs: Vec<BigInt> = Vec::new();
    let mut m = 0;
    for i in 0..n {
        for j in i..n {
            let mut row = vec![0i64; nn];
            for k in 0..n {
                row[k * n + j] += q.entry(i, k);
                row[k * n + i] += q.entry(j, k);
            }
            eqs.extend(row.into_iter().map(BigInt::from));
            m += 1;
        }
    }
    let kernel = integer_kernel(m, nn, &eqs);
    let r = n * (n - 1) / 2;
    debug_assert_eq!(kernel.len(), r);
    let basis = kernel
        .iter()
        .map(|v| v.iter().map(|x| x.to_i64().ok_or_else(|| Error::EntryTooLarge(0))).collect())
        .collect::<Result<Vec<Vec<i64>>>>()?;
    let flat: Vec<BigInt> = kernel.into_iter().flatten().collect();
    let elementary_divisors = elementary_divisors(r, nn, &flat).iter().map(|d| d.to_string()).collect();
    Ok(LieBasis { n, r, basis, elementary_divisors })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else { return out };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// All `r × r` minors of the coordinate matrix (lexicographic column
/// subsets), divided by their gcd and signed so the first nonzero one is
/// positive. Returned sparsely as (column subset, coordinate).
pub fn pluecker_primitive(b: &LieBasis) -> Result<Vec<(Vec<usize>, BigInt)>> {
    if b.n > MAX_PLUECKER_DIM {
        return Err(Error::Unsupported(format!(
            "explicit Plücker coordinates are limited to n ≤ {MAX_PLUECKER_DIM}"
        )));
    }
    let (r, nn) = (b.r, b.n * b.n);
    let coords = b.coords();
    let mut out = Vec::new();
    let mut g = BigInt::zero();
    for cols in combinations(nn, r) {
        let minor: Vec<BigInt> =
            (0..r).flat_map(|i| cols.iter().map(move |&c| (i, c))).map(|(i, c)| coords[i * nn + c].clone()).collect();
        let d = det_bigint(r, &minor);
        if !d.is_zero() {
            g = g.gcd(&d);
            out.push((cols, d));
        }
    }
    if g.is_zero() {
        return Err(Error::DegenerateBasis);
    }
    if out[0].1.is_negative() {
        g = -g;
    }
    for (_, d) in &mut out {
        *d /= &g;
    }
    Ok(out)
}

fn ser_decimal<S: Serializer, T: std::fmt::Display>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_sparse<S: Serializer>(
    x: &Option<Vec<(Vec<usize>, BigInt)>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let v: Option<Vec<(&Vec<usize>, String)>> =
        x.as_ref().map(|v| v.iter().map(|(c, d)| (c, d.to_string())).collect());
    v.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscReport {
    pub n: usize,
    /// Sparse primitive Plücker vector, present for n ≤ 4.
    #[serde(serialize_with = "ser_sparse")]
    pub pluecker: Option<Vec<(Vec<usize>, BigInt)>>,
    /// Squared norm of the multivector of the basis conjugated into the
    /// orthonormal frame of Q, `det[tr(X_iᵀ·A·X_j·A⁻¹)]`.
    #[serde(serialize_with = "ser_decimal")]
    pub norm_sq: BigRational,
    /// Squared Euclidean norm of the raw integer coordinates, `det(C·Cᵀ)`.
    #[serde(serialize_with = "ser_decimal")]
    pub coord_norm_sq: BigInt,
    pub disc: f64,
    pub log2_disc: f64,
    pub omitted_factor_note: &'static str,
}

fn log2_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("finite").log2() + shift as f64
}

fn log2_rational(x: &BigRational) -> f64 {
    log2_bigint(x.numer()) - log2_bigint(x.denom())
}

fn trace_gram(b: &LieBasis, f: impl Fn(&[i64], &[i64]) -> BigRational) -> Vec<BigRational> {
    let r = b.r;
    (0..r * r).map(|k| f(&b.basis[k / r], &b.basis[k % r])).collect()
}

fn mat_rat(n: usize, x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
    (0..n * n)
        .map(|k| (0..n).map(|l| &x[(k / n) * n + l] * &y[l * n + k % n]).sum())
        .collect()
}

/// `tr(Xᵀ·A·Y·A⁻¹)`.
fn conjugated_inner(n: usize, a: &[BigRational], a_inv: &[BigRational], x: &[i64], y: &[i64]) -> BigRational {
    let xt: Vec<BigRational> = (0..n * n).map(|k| BigRational::from_integer(x[(k % n) * n + k / n].into())).collect();
    let yr: Vec<BigRational> = y.iter().map(|&v| BigRational::from_integer(v.into())).collect();
    let prod = mat_rat(n, &mat_rat(n, &mat_rat(n, &xt, a), &yr), a_inv);
    (0..n).map(|i| prod[i * n + i].clone()).sum()
}

pub fn disc_homogeneous(q: &QuadraticForm) -> Result<DiscReport> {
    let b = so_lie_basis(q)?;
    let n = q.dim();
    let a: Vec<BigRational> = q.gram().iter().map(|&v| BigRational::from_integer(v.into())).collect();
    let a_inv = inverse_rational(n, q.gram()).expect("positive definite");
    let gram = trace_gram(&b, |x, y| conjugated_inner(n, &a, &a_inv, x, y));
    let norm_sq = det_rational(b.r, &gram);
    let eucl = trace_gram(&b, |x, y| {
        BigRational::from_integer(x.iter().zip(y).map(|(&u, &v)| BigInt::from(u) * v).sum())
    });
    let coord_norm_sq = det_rational(b.r, &eucl).to_integer();
    let pluecker = if n <= MAX_PLUECKER_DIM { Some(pluecker_primitive(&b)?) } else { None };
    let log2_disc = log2_rational(&norm_sq) / 2.0;
    Ok(DiscReport {
        n,
        pluecker,
        disc: log2_disc.exp2(),
        log2_disc,
        norm_sq,
        coord_norm_sq,
        omitted_factor_note: OMITTED_FACTOR_NOTE,
    })
}

/// Determinant of the trace form `tr(X_i·X_j)` on the saturated basis.
pub fn killing_determinant(q: &QuadraticForm) -> Result<BigInt> {
    let b = so_lie_basis(q)?;
    let n = q.dim();
    let gram = trace_gram(&b, |x, y| {
        let t: i64 = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| x[i * n + k] * y[k * n + i]).sum();
        BigRational::from_integer(t.into())
    });
    Ok(det_rational(b.r, &gram).to_integer())
}

/// Whether the trace form on so(Q) ∩ M_n(Z) has unit determinant at `p`.
pub fn killing_unit_check(q: &QuadraticForm, p: u64) -> Result<bool> {
    let d = killing_determinant(q)?;
    Ok(!d.is_zero() && valuation(&d, p) == 0)
}

impl DiscReport {
    pub fn norm_sq_is_integral(&self) -> bool {
        self.norm_sq.denom().is_one()
    }
}
