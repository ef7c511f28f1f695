//! Canonical representatives of Z-equivalence classes.
//!
//! Candidate bases are built greedily: the k-th vector has minimal norm
//! among vectors extending the first k−1 to a primitive system. Among all
//! such bases the Gram matrix with the smallest key is chosen, where the key
//! lists, row by row, the diagonal entry followed by the entries left of it,
//! and an off-diagonal entry `x` is ranked by `(|x|, x < 0)`. The set of
//! greedy bases is intrinsic to the lattice, so the minimum is a class
//! invariant.

use serde::{Deserialize, Serialize};

use crate::enumerate::short_vectors;
use crate::error::{Error, Result};
use crate::form::{QuadraticForm, Unimodular};
use crate::linalg;
use crate::lll::lll_reduce;

pub const MAX_CANONICAL_DIM: usize = 6;

/// A form together with a witness `U` such that `Uᵀ·original·U = canonical`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalCertificate {
    pub canonical: QuadraticForm,
    pub witness: Unimodular,
}

impl CanonicalCertificate {
    /// Checks the witness identity exactly.
    pub fn new(original: &QuadraticForm, canonical: QuadraticForm, witness: Unimodular) -> Result<Self> {
        if original.transform(&witness) != canonical {
            return Err(Error::InvalidArgument("witness does not map original to canonical".into()));
        }
        Ok(CanonicalCertificate { canonical, witness })
    }

    pub(crate) fn new_trusted(canonical: QuadraticForm, witness: Unimodular) -> Self {
        CanonicalCertificate { canonical, witness }
    }
}

fn offdiag_key(x: i64) -> u64 {
    2 * x.unsigned_abs() + u64::from(x < 0)
}

/// Ordering key of a Gram matrix as used by [`canonical_form`].
pub fn gram_key(q: &QuadraticForm) -> Vec<u64> {
    let n = q.dim();
    let mut key = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..n {
        key.push(q.entry(k, k) as u64);
        for j in 0..k {
            key.push(offdiag_key(q.entry(k, j)));
        }
    }
    key
}

struct Builder<'a> {
    q: &'a QuadraticForm,
    n: usize,
    /// All vectors up to `bound`, sorted by norm.
    pool: Vec<(Vec<i64>, i64)>,
    bound: i64,
    prefix: Vec<Vec<i64>>,
    key: Vec<u64>,
    best: Option<(Vec<u64>, Vec<Vec<i64>>)>,
}

impl<'a> Builder<'a> {
    fn new(q: &'a QuadraticForm) -> Self {
        let red = lll_reduce(q);
        let bound = *red.canonical.diag_entries().iter().max().expect("nonempty");
        let mut b = Builder {
            q,
            n: q.dim(),
            pool: Vec::new(),
            bound: 0,
            prefix: Vec::new(),
            key: Vec::new(),
            best: None,
        };
        b.grow(bound);
        b
    }

    fn grow(&mut self, bound: i64) {
        self.bound = bound;
        self.pool = short_vectors(self.q, bound, false).into_iter().map(|s| (s.v, s.value)).collect();
    }

    /// Candidates extending the prefix primitively, of minimal norm.
    fn candidates(&mut self, minv: &[i64]) -> Vec<(Vec<i64>, i64)> {
        let (n, k) = (self.n, self.prefix.len());
        loop {
            let mut found: Vec<(Vec<i64>, i64)> = Vec::new();
            for (v, val) in &self.pool {
                if let Some((_, m)) = found.first() {
                    if val > m {
                        break;
                    }
                }
                let coords: Vec<i64> = (k..n)
                    .map(|i| (0..n).map(|j| minv[i * n + j] as i128 * v[j] as i128).sum::<i128>() as i64)
                    .collect();
                if linalg::gcd_slice(&coords) == 1 {
                    found.push((v.clone(), *val));
                }
            }
            if !found.is_empty() {
                return found;
            }
            let next = self.bound.saturating_mul(2).max(1);
            self.grow(next);
        }
    }

    fn search(&mut self, minv: Vec<i64>) {
        let (n, k) = (self.n, self.prefix.len());
        if k == n {
            let better = match &self.best {
                None => true,
                Some((bk, _)) => self.key < *bk,
            };
            if better {
                self.best = Some((self.key.clone(), self.prefix.clone()));
            }
            return;
        }
        let cands = self.candidates(&minv);
        let rows: Vec<Vec<u64>> = cands
            .iter()
            .map(|(v, val)| {
                let mut row = vec![*val as u64];
                row.extend(self.prefix.iter().map(|p| offdiag_key(self.q.bilinear(v, p) as i64)));
                row
            })
            .collect();
        let min_row = rows.iter().min().expect("nonempty").clone();
        if let Some((bk, _)) = &self.best {
            let mut trial = self.key.clone();
            trial.extend_from_slice(&min_row);
            if trial.as_slice() > &bk[..trial.len()] {
                return;
            }
        }
        for ((v, _), row) in cands.into_iter().zip(rows) {
            if row != min_row {
                continue;
            }
            let next_minv = extend_inverse(n, k, &minv, &v);
            let klen = self.key.len();
            self.key.extend_from_slice(&row);
            self.prefix.push(v);
            self.search(next_minv);
            self.prefix.pop();
            self.key.truncate(klen);
        }
    }
}

/// Given `M⁻¹` for a unimodular `M` whose first `k` columns are the prefix,
/// returns `M'⁻¹` for a completion whose column `k` is `v`.
fn extend_inverse(n: usize, k: usize, minv: &[i64], v: &[i64]) -> Vec<i64> {
    let c: Vec<i64> = (0..n)
        .map(|i| (0..n).map(|j| minv[i * n + j] as i128 * v[j] as i128).sum::<i128>() as i64)
        .collect();
    let m = n - k;
    let (_, vinv) = linalg::primitive_completion(&c[k..]);
    // W⁻¹ = [[I, −c_top·(row 0 of V⁻¹)], [0, V⁻¹]]
    let mut winv = linalg::identity(n);
    for i in 0..k {
        for j in 0..m {
            winv[i * n + k + j] = -c[i] * vinv[j];
        }
    }
    for i in 0..m {
        for j in 0..m {
            winv[(k + i) * n + k + j] = vinv[i * m + j];
        }
    }
    linalg::matmul(n, &winv, minv)
}

/// Canonical representative of the class of `q` with a witness.
pub fn canonical_form(q: &QuadraticForm) -> Result<CanonicalCertificate> {
    let n = q.dim();
    if n > MAX_CANONICAL_DIM {
        return Err(Error::DimensionOutOfRange(n, crate::form::MIN_DIM, MAX_CANONICAL_DIM));
    }
    let mut b = Builder::new(q);
    b.search(linalg::identity(n));
    let (_, basis) = b.best.expect("a greedy basis always exists");
    let witness = Unimodular::from_columns(&basis).expect("greedy basis is unimodular");
    let canonical = q.transform(&witness);
    CanonicalCertificate::new(q, canonical, witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed_point() {
        let q = QuadraticForm::identity(3).unwrap();
        assert_eq!(canonical_form(&q).unwrap().canonical, q);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let q = QuadraticForm::diagonal(&[2, 1]).unwrap();
        assert_eq!(canonical_form(&q).unwrap().canonical, QuadraticForm::diagonal(&[1, 2]).unwrap());
    }

    #[test]
    fn hexagonal_prefers_positive_offdiagonal() {
        let q = QuadraticForm::new(vec![vec![2, -1], vec![-1, 2]]).unwrap();
        let c = canonical_form(&q).unwrap();
        assert_eq!(c.canonical.rows(), vec![vec![2, 1], vec![1, 2]]);
    }

    #[test]
    fn idempotent_and_witnessed() {
        let q = QuadraticForm::new(vec![vec![5, 2, 1], vec![2, 7, 3], vec![1, 3, 9]]).unwrap();
        let c = canonical_form(&q).unwrap();
        assert_eq!(q.transform(&c.witness), c.canonical);
        assert_eq!(canonical_form(&c.canonical).unwrap().canonical, c.canonical);
    }

    #[test]
    fn rejects_large_dimension() {
        let q = QuadraticForm::identity(7).unwrap();
        assert!(matches!(canonical_form(&q), Err(Error::DimensionOutOfRange(7, _, _))));
    }
}
