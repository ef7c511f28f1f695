//! Validated positive-definite integral Gram matrices and unimodular
//! change-of-basis matrices.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;
/// Entries are kept small enough that every value `vᵀAv` we evaluate on
/// enumerated vectors fits comfortably in an `i128`.
pub const MAX_ENTRY: i64 = 1 << 40;

/// A positive-definite integral quadratic form `Q(x) = xᵀAx`, `A` symmetric.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct QuadraticForm {
    n: usize,
    gram: Vec<i64>,
    det: BigInt,
}

impl QuadraticForm {
    /// Validates a square integer matrix.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare);
        }
        let flat: Vec<i64> = rows.into_iter().flatten().collect();
        Self::from_flat(n, flat)
    }

    pub fn from_flat(n: usize, gram: Vec<i64>) -> Result<Self> {
        if gram.len() != n * n {
            return Err(Error::NotSquare);
        }
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange(n, MIN_DIM, MAX_DIM));
        }
        if let Some(&x) = gram.iter().find(|x| x.abs() > MAX_ENTRY) {
            return Err(Error::EntryTooLarge(x as i128));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i * n + j] != gram[j * n + i] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let minors = linalg::bareiss_leading_minors(n, &gram);
        if minors.iter().any(|m| !m.is_positive()) {
            return Err(Error::NotPositiveDefinite);
        }
        let det = minors[n - 1].clone();
        Ok(QuadraticForm { n, gram, det })
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let n = entries.len();
        let mut g = vec![0; n * n];
        for (i, &e) in entries.iter().enumerate() {
            g[i * n + i] = e;
        }
        Self::from_flat(n, g)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1; n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn gram(&self) -> &[i64] {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.gram.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// `Q(v) = vᵀAv`.
    pub fn eval(&self, v: &[i64]) -> i128 {
        self.bilinear(v, v)
    }

    /// `B(u, v) = uᵀAv`.
    pub fn bilinear(&self, u: &[i64], v: &[i64]) -> i128 {
        let n = self.n;
        let mut s = 0i128;
        for i in 0..n {
            if u[i] == 0 {
                continue;
            }
            let mut row = 0i128;
            for j in 0..n {
                row += self.gram[i * n + j] as i128 * v[j] as i128;
            }
            s += u[i] as i128 * row;
        }
        s
    }

    /// `A·v`.
    pub fn apply(&self, v: &[i64]) -> Vec<i128> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.gram[i * n + j] as i128 * v[j] as i128).sum()).collect()
    }

    /// The form `Uᵀ·A·U`, i.e. the Gram matrix of the basis given by the
    /// columns of `U`.
    pub fn transform(&self, u: &Unimodular) -> QuadraticForm {
        assert_eq!(u.n, self.n);
        let gram = linalg::congruence(self.n, &self.gram, &u.entries);
        QuadraticForm { n: self.n, gram, det: self.det.clone() }
    }

    /// Gram matrix of an arbitrary integer basis (columns of `basis`);
    /// re-validated since the determinant changes.
    pub fn sublattice(&self, basis: &[i64]) -> Result<QuadraticForm> {
        let gram = linalg::congruence(self.n, &self.gram, basis);
        Self::from_flat(self.n, gram)
    }

    pub fn scaled(&self, c: i64) -> Result<QuadraticForm> {
        Self::from_flat(self.n, self.gram.iter().map(|&x| x * c).collect())
    }

    pub fn diag_entries(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.entry(i, i)).collect()
    }

    /// Text format: the dimension on the first line, then `n` rows.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for r in self.gram.chunks(self.n) {
            let row: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses either the text format or a JSON array of arrays.
    pub fn parse(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        if trimmed.starts_with('[') {
            let rows: Vec<Vec<i64>> =
                serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
            return Self::new(rows);
        }
        let mut tokens = trimmed.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?
            .parse()
            .map_err(|_| Error::Parse("first token must be the dimension".into()))?;
        let values: Vec<i64> = tokens
            .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad integer `{t}`"))))
            .collect::<Result<_>>()?;
        if values.len() != n * n {
            return Err(Error::Parse(format!("expected {} entries, found {}", n * n, values.len())));
        }
        let lines = trimmed.lines().filter(|l| !l.trim().is_empty()).count();
        if lines != n + 1 {
            return Err(Error::Parse(format!("expected {} lines, found {lines}", n + 1)));
        }
        Self::from_flat(n, values)
    }
}

impl TryFrom<Vec<Vec<i64>>> for QuadraticForm {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<QuadraticForm> for Vec<Vec<i64>> {
    fn from(q: QuadraticForm) -> Self {
        q.rows()
    }
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadraticForm({:?})", self.rows())
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// An integer matrix with determinant ±1. Columns are basis vectors.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Unimodular {
    n: usize,
    entries: Vec<i64>,
}

impl Unimodular {
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::NotSquare);
        }
        let d = linalg::det_i64(n, &entries);
        if d.abs() != BigInt::one() {
            return Err(Error::InvalidArgument(format!("determinant {d} is not ±1")));
        }
        Ok(Unimodular { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Unimodular { n, entries: linalg::identity(n) }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<i64>]) -> Result<Self> {
        let n = cols.len();
        let mut e = vec![0; n * n];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                e[i * n + j] = c[i];
            }
        }
        Self::new(n, e)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.entry(i, j)).collect()
    }

    pub fn mul(&self, other: &Unimodular) -> Unimodular {
        Unimodular { n: self.n, entries: linalg::matmul(self.n, &self.entries, &other.entries) }
    }

    pub fn inverse(&self) -> Unimodular {
        let inv = linalg::inverse_unimodular(self.n, &self.entries).expect("unimodular inverse");
        Unimodular { n: self.n, entries: inv }
    }

    pub fn transpose(&self) -> Unimodular {
        Unimodular { n: self.n, entries: linalg::transpose(self.n, &self.entries) }
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let s: i128 = (0..n).map(|j| self.entries[i * n + j] as i128 * v[j] as i128).sum();
                i64::try_from(s).expect("overflow applying unimodular matrix")
            })
            .collect()
    }

    pub fn det(&self) -> i64 {
        if linalg::det_i64(self.n, &self.entries).is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl fmt::Debug for Unimodular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unimodular({:?})", self.rows())
    }
}
