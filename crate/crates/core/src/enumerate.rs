//! Fincke–Pohst enumeration of lattice vectors of bounded norm.
//!
//! The search runs on an LLL-reduced copy of the form with a floating
//! Cholesky decomposition and a small slack; every candidate is then checked
//! with exact integer arithmetic, so the output is exact.

use serde::{Deserialize, Serialize};

use crate::form::QuadraticForm;
use crate::lll::lll_reduce;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortVector {
    pub v: Vec<i64>,
    pub value: i64,
}

/// Cholesky data in the `Q(x) = Σ qᵢᵢ (xᵢ + Σ_{j>i} qᵢⱼ xⱼ)²` shape.
struct Cholesky {
    n: usize,
    q: Vec<f64>,
}

impl Cholesky {
    fn new(f: &QuadraticForm) -> Self {
        let n = f.dim();
        let mut q: Vec<f64> = f.gram().iter().map(|&x| x as f64).collect();
        for i in 0..n {
            for j in i + 1..n {
                q[j * n + i] = q[i * n + j];
                q[i * n + j] /= q[i * n + i];
            }
            for k in i + 1..n {
                for l in k..n {
                    q[k * n + l] -= q[k * n + i] * q[i * n + l];
                }
            }
        }
        Cholesky { n, q }
    }

    fn diag(&self, i: usize) -> f64 {
        self.q[i * self.n + i]
    }

    fn coef(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }
}

/// Visits every nonzero `x` with `xᵀAx ≤ bound` (coordinates of `f` itself),
/// passing the exact value. Both `x` and `−x` are visited.
fn visit_raw(f: &QuadraticForm, bound: i64, visit: &mut dyn FnMut(&[i64], i64)) {
    if bound < 1 {
        return;
    }
    let n = f.dim();
    let ch = Cholesky::new(f);
    let b = bound as f64;
    let slack = 1e-7 * (b + 1.0);
    let mut x = vec![0i64; n];
    fn rec(
        i: usize,
        remaining: f64,
        ch: &Cholesky,
        f: &QuadraticForm,
        bound: i64,
        slack: f64,
        x: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64], i64),
    ) {
        let n = ch.n;
        let center: f64 = -(i + 1..n).map(|j| ch.coef(i, j) * x[j] as f64).sum::<f64>();
        let r2 = (remaining + slack) / ch.diag(i);
        if r2 < 0.0 {
            return;
        }
        let r = r2.sqrt();
        let lo = (center - r).ceil() as i64;
        let hi = (center + r).floor() as i64;
        for xi in lo..=hi {
            x[i] = xi;
            let t = xi as f64 - center;
            let rem = remaining - ch.diag(i) * t * t;
            if rem < -slack {
                continue;
            }
            if i == 0 {
                if x.iter().all(|&c| c == 0) {
                    continue;
                }
                let val = f.eval(x);
                if val <= bound as i128 {
                    visit(x, val as i64);
                }
            } else {
                rec(i - 1, rem.max(0.0), ch, f, bound, slack, x, visit);
            }
        }
        x[i] = 0;
    }
    rec(n - 1, b, &ch, f, bound, slack, &mut x, visit);
}

/// Visits every nonzero vector of norm ≤ `bound` in the coordinates of `q`,
/// enumerating on an LLL-reduced copy.
pub fn for_each_vector(q: &QuadraticForm, bound: i64, visit: &mut dyn FnMut(&[i64], i64)) {
    let red = lll_reduce(q);
    let u = &red.witness;
    visit_raw(&red.canonical, bound, &mut |w, val| {
        let v = u.apply(w);
        visit(&v, val);
    });
}

fn first_nonzero_positive(v: &[i64]) -> bool {
    v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// All nonzero `v` with `Q(v) ≤ bound`, sorted by value then
/// lexicographically. With `one_per_pair` only the member of each `±v` pair
/// whose first nonzero coordinate is positive is kept.
pub fn short_vectors(q: &QuadraticForm, bound: i64, one_per_pair: bool) -> Vec<ShortVector> {
    let mut out = Vec::new();
    for_each_vector(q, bound, &mut |v, value| {
        if !one_per_pair || first_nonzero_positive(v) {
            out.push(ShortVector { v: v.to_vec(), value });
        }
    });
    out.sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.v.cmp(&b.v)));
    out
}

/// Minimal nonzero value represented by `q`.
pub fn minimum(q: &QuadraticForm) -> i64 {
    let red = lll_reduce(q);
    // the first reduced basis vector bounds the minimum from above
    let bound = red.canonical.diag_entries().into_iter().min().expect("nonempty");
    let mut best = bound;
    visit_raw(&red.canonical, bound, &mut |_, val| best = best.min(val));
    best
}

/// Number of vectors (counting both signs) of each norm `0..=bound`;
/// index 0 is always zero. Stops with `None` once the total passes `cap`.
pub fn norm_counts(q: &QuadraticForm, bound: i64, cap: u64) -> Option<Vec<u64>> {
    let mut counts = vec![0u64; bound.max(0) as usize + 1];
    let mut total = 0u64;
    let mut overflow = false;
    let red = lll_reduce(q);
    visit_raw(&red.canonical, bound, &mut |_, val| {
        if overflow {
            return;
        }
        counts[val as usize] += 1;
        total += 1;
        if total > cap {
            overflow = true;
        }
    });
    (!overflow).then_some(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(q: &QuadraticForm, bound: i64, radius: i64) -> Vec<(Vec<i64>, i64)> {
        let n = q.dim();
        let mut out = Vec::new();
        let mut x = vec![-radius; n];
        loop {
            if x.iter().any(|&c| c != 0) {
                let val = q.eval(&x);
                if val <= bound as i128 {
                    out.push((x.clone(), val as i64));
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
                    return out;
                }
                x[i] += 1;
                if x[i] <= radius {
                    break;
                }
                x[i] = -radius;
                i += 1;
            }
        }
    }

    #[test]
    fn identity_counts() {
        let i2 = QuadraticForm::identity(2).unwrap();
        assert_eq!(short_vectors(&i2, 1, false).len(), 4);
        assert_eq!(short_vectors(&i2, 2, false).len(), 8);
        assert_eq!(short_vectors(&i2, 2, true).len(), 4);
    }

    #[test]
    fn hexagonal_binary_has_six_minimal_vectors() {
        let q = QuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let sv = short_vectors(&q, 2, false);
        let oracle = brute(&q, 2, 2);
        assert_eq!(sv.len(), 6);
        assert_eq!(sv.iter().map(|s| (s.v.clone(), s.value)).collect::<Vec<_>>(), oracle);
    }

    #[test]
    fn minima() {
        assert_eq!(minimum(&QuadraticForm::identity(4).unwrap()), 1);
        assert_eq!(minimum(&QuadraticForm::diagonal(&[4, 6]).unwrap()), 4);
        assert_eq!(minimum(&QuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap()), 2);
    }

    #[test]
    fn agrees_with_box_search() {
        let forms = [
            vec![vec![3, 1, 0], vec![1, 4, 2], vec![0, 2, 5]],
            vec![vec![2, -1, 0, 0], vec![-1, 2, -1, 0], vec![0, -1, 2, -1], vec![0, 0, -1, 2]],
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 7]],
        ];
        for rows in forms {
            let q = QuadraticForm::new(rows).unwrap();
            for bound in [1, 5, 12, 20] {
                // Cholesky diagonal bounds each coordinate: |x_i| ≤ sqrt(bound · (A⁻¹)_ii) ≤ bound
                let oracle = brute(&q, bound, 5);
                let sv: Vec<_> = short_vectors(&q, bound, false).into_iter().map(|s| (s.v, s.value)).collect();
                assert_eq!(sv, oracle, "form {q:?} bound {bound}");
            }
        }
    }
}
