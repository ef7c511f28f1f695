//! Isometry testing and automorphism counting by backtracking over short
//! vectors whose pairwise inner products match a target Gram matrix.

use std::collections::BTreeMap;

use crate::enumerate::{for_each_vector, minimum, norm_counts};
use crate::form::{QuadraticForm, Unimodular};
use crate::lll::lll_reduce;

/// Cheap invariants used to rule out isometry before backtracking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub dim: usize,
    pub det: String,
    pub minimum: i64,
    /// Representation counts for norms `1..=theta_len`.
    pub theta: Vec<u64>,
}

/// The theta prefix covers norms up to twice the minimum, which depends
/// only on the isometry class.
pub fn fingerprint(q: &QuadraticForm) -> Fingerprint {
    let min = minimum(q);
    let counts = norm_counts(q, min.saturating_mul(2), 200_000)
        .or_else(|| norm_counts(q, min, u64::MAX))
        .expect("uncapped count");
    Fingerprint { dim: q.dim(), det: q.det().to_string(), minimum: min, theta: counts[1..].to_vec() }
}

/// Backtracking search for bases of `source` whose Gram matrix is `target`.
struct Search<'a> {
    n: usize,
    target: &'a QuadraticForm,
    candidates: Vec<Vec<(Vec<i64>, Vec<i128>)>>,
    chosen: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(source: &QuadraticForm, target: &'a QuadraticForm) -> Self {
        let n = source.dim();
        let diag = target.diag_entries();
        let bound = *diag.iter().max().expect("nonempty");
        let mut by_norm: BTreeMap<i64, Vec<(Vec<i64>, Vec<i128>)>> = BTreeMap::new();
        for_each_vector(source, bound, &mut |v, val| {
            if diag.contains(&val) {
                by_norm.entry(val).or_default().push((v.to_vec(), source.apply(v)));
            }
        });
        for list in by_norm.values_mut() {
            list.sort();
        }
        let candidates = diag.iter().map(|d| by_norm.get(d).cloned().unwrap_or_default()).collect();
        Search { n, target, candidates, chosen: Vec::with_capacity(n) }
    }

    fn compatible(&self, depth: usize, idx: usize) -> bool {
        let (v, _) = &self.candidates[depth][idx];
        self.chosen.iter().enumerate().all(|(j, &cj)| {
            let (_, av) = &self.candidates[j][cj];
            let ip: i128 = v.iter().zip(av).map(|(&a, &b)| a as i128 * b).sum();
            ip == self.target.entry(j, depth) as i128
        })
    }

    /// Calls `found` for each solution; stops early when it returns `false`.
    fn run(&mut self, found: &mut dyn FnMut(&[Vec<i64>]) -> bool) -> bool {
        let depth = self.chosen.len();
        if depth == self.n {
            let cols: Vec<Vec<i64>> =
                self.chosen.iter().enumerate().map(|(j, &c)| self.candidates[j][c].0.clone()).collect();
            return found(&cols);
        }
        for idx in 0..self.candidates[depth].len() {
            if self.compatible(depth, idx) {
                self.chosen.push(idx);
                let go_on = self.run(found);
                self.chosen.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
}

/// All isometries `U` with `Uᵀ·A₁·U = A₂`, up to `limit` of them.
pub fn isometries(q1: &QuadraticForm, q2: &QuadraticForm, limit: usize) -> Vec<Unimodular> {
    if q1.dim() != q2.dim() || q1.det() != q2.det() {
        return Vec::new();
    }
    let red2 = lll_reduce(q2);
    let w_inv = red2.witness.inverse();
    let mut search = Search::new(q1, &red2.canonical);
    let mut out = Vec::new();
    search.run(&mut |cols| {
        let v = Unimodular::from_columns(cols).expect("Gram-preserving integer basis is unimodular");
        out.push(v.mul(&w_inv));
        out.len() < limit
    });
    out
}

/// Returns `U` with `Uᵀ·gram₁·U = gram₂`, or `None` if the forms are not
/// Z-equivalent.
pub fn is_isometric(q1: &QuadraticForm, q2: &QuadraticForm) -> Option<Unimodular> {
    if q1.dim() != q2.dim() || q1.det() != q2.det() {
        return None;
    }
    if q1 == q2 {
        return Some(Unimodular::identity(q1.dim()));
    }
    if fingerprint(q1) != fingerprint(q2) {
        return None;
    }
    isometries(q1, q2, 1).pop()
}

/// `|{U ∈ GLₙ(Z) : Uᵀ·A·U = A}|`.
pub fn automorphism_order(q: &QuadraticForm) -> u64 {
    let red = lll_reduce(q);
    let r = &red.canonical;
    let mut search = Search::new(r, r);
    let mut count = 0u64;
    search.run(&mut |_| {
        count += 1;
        true
    });
    count
}

/// Automorphisms of `q` in its own coordinates (for small groups).
pub fn automorphisms(q: &QuadraticForm, limit: usize) -> Vec<Unimodular> {
    isometries(q, q, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive search over matrices with entries in [−1, 1].
    fn brute_aut(q: &QuadraticForm) -> u64 {
        let n = q.dim();
        let total = 3usize.pow((n * n) as u32);
        let mut count = 0;
        for code in 0..total {
            let mut c = code;
            let e: Vec<i64> = (0..n * n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect();
            let m = crate::linalg::congruence(n, q.gram(), &e);
            if m == q.gram() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn automorphism_orders_match_brute_force() {
        let i2 = QuadraticForm::identity(2).unwrap();
        assert_eq!(automorphism_order(&i2), 8);
        assert_eq!(brute_aut(&i2), 8);
        let d12 = QuadraticForm::diagonal(&[1, 2]).unwrap();
        assert_eq!(automorphism_order(&d12), 4);
        assert_eq!(brute_aut(&d12), 4);
        let i3 = QuadraticForm::identity(3).unwrap();
        assert_eq!(automorphism_order(&i3), 48);
        assert_eq!(brute_aut(&i3), 48);
        let a2 = QuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        assert_eq!(automorphism_order(&a2), 12);
        assert_eq!(brute_aut(&a2), 12);
    }

    #[test]
    fn isometry_examples() {
        let i2 = QuadraticForm::identity(2).unwrap();
        assert!(is_isometric(&i2, &i2).is_some());
        assert!(is_isometric(&i2, &QuadraticForm::diagonal(&[1, 2]).unwrap()).is_none());
        let u = Unimodular::new(3, vec![1, 2, -1, 0, 1, 3, 0, 0, 1]).unwrap();
        let q = QuadraticForm::new(vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 5]]).unwrap();
        let t = q.transform(&u);
        let w = is_isometric(&q, &t).expect("equivalent");
        assert_eq!(q.transform(&w), t);
    }

    #[test]
    fn automorphisms_closed_under_inversion() {
        let q = QuadraticForm::new(vec![vec![2, 1, 0], vec![1, 2, 0], vec![0, 0, 3]]).unwrap();
        let auts = automorphisms(&q, usize::MAX);
        assert_eq!(auts.len() as u64, automorphism_order(&q));
        for a in &auts {
            assert!(auts.contains(&a.inverse()));
        }
    }
}
