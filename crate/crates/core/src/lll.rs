//! Exact LLL reduction of a Gram matrix (integral variant working with the
//! Gram determinants `d_i` and scaled coefficients `λ_ij = d_j·μ_ij`, so no
//! rationals are ever formed).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::canonical::CanonicalCertificate;
use crate::form::{QuadraticForm, Unimodular};

/// Lovász parameter δ = 99/100.
const DELTA_NUM: i64 = 99;
const DELTA_DEN: i64 = 100;

/// LLL-reduces `q`; the certificate's witness `U` satisfies `Uᵀ·A·U = reduced`.
pub fn lll_reduce(q: &QuadraticForm) -> CanonicalCertificate {
    let n = q.dim();
    // basis vectors are columns of h; h[k] is the k-th basis vector
    let mut h: Vec<Vec<i64>> = (0..n).map(|k| (0..n).map(|i| i64::from(i == k)).collect()).collect();
    let ip = |h: &Vec<Vec<i64>>, i: usize, j: usize| BigInt::from(q.bilinear(&h[i], &h[j]));

    // 1-indexed arrays for d, λ as in the classical presentation
    let mut d: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut lam: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::from(1);
    d[1] = ip(&h, 0, 0);
    let mut k = 2usize;
    let mut kmax = 1usize;

    if n == 1 {
        return CanonicalCertificate::new_trusted(q.clone(), Unimodular::identity(n));
    }

    loop {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = ip(&h, k - 1, j - 1);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k] = u;
                }
            }
        }
        reduce(&mut h, &mut lam, &d, k, k - 1);
        let lhs = BigInt::from(DELTA_DEN) * &d[k] * &d[k - 2];
        let rhs = BigInt::from(DELTA_NUM) * &d[k - 1] * &d[k - 1]
            - BigInt::from(DELTA_DEN) * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            swap(&mut h, &mut lam, &mut d, k, kmax);
            k = (k - 1).max(2);
            continue;
        }
        for l in (1..k - 1).rev() {
            reduce(&mut h, &mut lam, &d, k, l);
        }
        k += 1;
        if k > n {
            break;
        }
    }

    let witness = Unimodular::from_columns(&h).expect("LLL transform is unimodular");
    let reduced = q.transform(&witness);
    CanonicalCertificate::new_trusted(reduced, witness)
}

fn reduce(h: &mut [Vec<i64>], lam: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
    let two_lam: BigInt = &lam[k][l] * 2;
    if two_lam.abs() <= d[l] {
        return;
    }
    // nearest integer to λ/d
    let q = (two_lam + &d[l]).div_floor(&(&d[l] * 2));
    let qi: i64 = i64::try_from(&q).expect("LLL coefficient overflow");
    let (hk, hl) = (h[k - 1].clone(), &h[l - 1]);
    h[k - 1] = hk.iter().zip(hl).map(|(a, b)| a - qi * b).collect();
    lam[k][l] -= &q * &d[l];
    for i in 1..l {
        let t = &q * &lam[l][i];
        lam[k][i] -= t;
    }
}

fn swap(h: &mut [Vec<i64>], lam: &mut [Vec<BigInt>], d: &mut [BigInt], k: usize, kmax: usize) {
    h.swap(k - 1, k - 2);
    for j in 1..k - 1 {
        let t = lam[k][j].clone();
        lam[k][j] = lam[k - 1][j].clone();
        lam[k - 1][j] = t;
    }
    let l = lam[k][k - 1].clone();
    let b = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
        lam[i][k - 1] = (&b * &t + &l * &lam[i][k]) / &d[k];
    }
    d[k - 1] = b;
}

/// Checks the size-reduction and Lovász conditions exactly (test helper and
/// debug assertion).
pub fn is_lll_reduced(q: &QuadraticForm) -> bool {
    use num_rational::BigRational;
    let n = q.dim();
    let a: Vec<BigRational> =
        q.gram().iter().map(|&x| BigRational::from_integer(x.into())).collect();
    // rational Gram–Schmidt on the Gram matrix
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut bstar = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = a[i * n + j].clone();
            for k in 0..j {
                s -= &mu[i][k] * &mu[j][k] * &bstar[k];
            }
            mu[i][j] = s / &bstar[j];
        }
        let mut s = a[i * n + i].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &bstar[k];
        }
        bstar[i] = s;
    }
    let half = BigRational::new(1.into(), 2.into());
    let delta = BigRational::new(DELTA_NUM.into(), DELTA_DEN.into());
    for i in 0..n {
        for j in 0..i {
            if mu[i][j].abs() > half {
                return false;
            }
        }
        if i > 0 {
            let m = &mu[i][i - 1];
            if bstar[i] < (&delta - m * m) * &bstar[i - 1] {
                return false;
            }
        }
    }
    true
}
