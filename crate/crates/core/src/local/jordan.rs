//! Jordan splittings of Z_p-lattices by p-adic block diagonalisation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::padic::{self, SquareClass};
use crate::form::QuadraticForm;
use crate::linalg::valuation;

/// An orthogonal summand of rank 1 or 2 of a p-adic diagonalisation, scaled
/// by `p^scale`. For a rank-2 piece (p = 2 only) the unit-scaled block is
/// `[[a, b], [b, c]]` with `a, c` even and `b` a unit.
#[derive(Clone, Debug, PartialEq)]
pub enum Piece {
    One { scale: u32, unit: BigRational },
    Two { scale: u32, a: BigRational, b: BigRational, c: BigRational },
}

impl Piece {
    pub fn scale(&self) -> u32 {
        match self {
            Piece::One { scale, .. } | Piece::Two { scale, .. } => *scale,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Piece::One { .. } => 1,
            Piece::Two { .. } => 2,
        }
    }

    /// Determinant of the unit-scaled piece.
    pub fn unit_det(&self) -> BigRational {
        match self {
            Piece::One { unit, .. } => unit.clone(),
            Piece::Two { a, b, c, .. } => a * c - b * b,
        }
    }
}

/// One Jordan constituent `p^scale · L_scale`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constituent {
    pub scale: u32,
    pub dim: usize,
    /// Square class of the unit determinant (valuation bit is always 0).
    pub det_class: SquareClass,
    /// p = 2 only: the unit determinant mod 8.
    pub det_mod8: Option<u8>,
    /// p = 2 only: type I (odd) when true.
    pub odd: Option<bool>,
    /// p = 2 only: oddity, the trace of a diagonalisation mod 8.
    pub oddity: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JordanSplitting {
    pub prime: u64,
    pub constituents: Vec<Constituent>,
}

impl JordanSplitting {
    pub fn total_dim(&self) -> usize {
        self.constituents.iter().map(|c| c.dim).sum()
    }

    /// `Σ scale·dim`, which equals `v_p(det)`.
    pub fn det_valuation(&self) -> u32 {
        self.constituents.iter().map(|c| c.scale * c.dim as u32).sum()
    }
}

fn rat_valuation(x: &BigRational, p: u64) -> i64 {
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

fn pow_p(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

/// Block-diagonalises the Gram matrix over Z_(p). Pieces are returned in the
/// order they were split off (not sorted).
pub fn diagonalize(q: &QuadraticForm, p: u64) -> Vec<Piece> {
    let n = q.dim();
    let mut m: Vec<Vec<BigRational>> = q
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| BigRational::from_integer(x.into())).collect())
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pieces = Vec::new();
    while !active.is_empty() {
        // entry of minimal valuation; diagonal entries win ties
        let mut best: Option<(i64, usize, usize)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai..] {
                if m[i][j].is_zero() {
                    continue;
                }
                let v = rat_valuation(&m[i][j], p);
                let diag = i == j;
                let better = match best {
                    None => true,
                    Some((bv, bi, bj)) => v < bv || (v == bv && diag && bi != bj),
                };
                if better {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, i, j) = best.expect("nondegenerate form");
        if i == j {
            pivot_one(&mut m, &mut active, i);
            let scale = v as u32;
            pieces.push(Piece::One { scale, unit: &m[i][i] / pow_p(p, scale) });
        } else if p != 2 {
            // e_i ← e_i + e_j makes the diagonal entry attain the minimum
            for k in 0..n {
                let t = m[j][k].clone();
                m[i][k] += t;
            }
            for k in 0..n {
                let t = m[k][j].clone();
                m[k][i] += t;
            }
            pivot_one(&mut m, &mut active, i);
            let scale = v as u32;
            pieces.push(Piece::One { scale, unit: &m[i][i] / pow_p(p, scale) });
        } else {
            pivot_two(&mut m, &mut active, i, j);
            let scale = v as u32;
            let s = pow_p(2, scale);
            pieces.push(Piece::Two {
                scale,
                a: &m[i][i] / &s,
                b: &m[i][j] / &s,
                c: &m[j][j] / &s,
            });
        }
    }
    pieces
}

fn pivot_one(m: &mut [Vec<BigRational>], active: &mut Vec<usize>, i: usize) {
    active.retain(|&x| x != i);
    let piv = m[i][i].clone();
    for &k in active.iter() {
        let f = &m[k][i] / &piv;
        for &l in active.iter() {
            let t = &f * &m[i][l];
            m[k][l] -= t;
        }
    }
}

fn pivot_two(m: &mut [Vec<BigRational>], active: &mut Vec<usize>, i: usize, j: usize) {
    active.retain(|&x| x != i && x != j);
    let (a, b, c) = (m[i][i].clone(), m[i][j].clone(), m[j][j].clone());
    let det = &a * &c - &b * &b;
    // P⁻¹ = [[c, −b], [−b, a]] / det
    let (ia, ib, ic) = (&c / &det, -&b / &det, &a / &det);
    for &k in active.iter() {
        let (xk, yk) = (m[k][i].clone(), m[k][j].clone());
        let (fk0, fk1) = (&xk * &ia + &yk * &ib, &xk * &ib + &yk * &ic);
        for &l in active.iter() {
            let t = &fk0 * &m[i][l] + &fk1 * &m[j][l];
            m[k][l] -= t;
        }
    }
}

/// Groups pieces by scale into Jordan constituents.
pub fn constituents_from_pieces(p: u64, pieces: &[Piece]) -> Vec<Constituent> {
    let mut scales: Vec<u32> = pieces.iter().map(Piece::scale).collect();
    scales.sort_unstable();
    scales.dedup();
    scales
        .into_iter()
        .map(|s| {
            let here: Vec<&Piece> = pieces.iter().filter(|pc| pc.scale() == s).collect();
            let dim = here.iter().map(|pc| pc.dim()).sum();
            let det: BigRational = here.iter().fold(BigRational::one(), |acc, pc| acc * pc.unit_det());
            let det_class = padic::square_class_rational(&det, p);
            if p == 2 {
                let odd = here.iter().any(|pc| matches!(pc, Piece::One { .. }));
                let oddity: u64 = here
                    .iter()
                    .filter_map(|pc| match pc {
                        Piece::One { unit, .. } => Some(padic::rational_residue(unit, 8)),
                        Piece::Two { .. } => None,
                    })
                    .sum();
                Constituent {
                    scale: s,
                    dim,
                    det_class,
                    det_mod8: Some(padic::rational_residue(&det, 8) as u8),
                    odd: Some(odd),
                    oddity: Some(if odd { (oddity % 8) as u8 } else { 0 }),
                }
            } else {
                Constituent { scale: s, dim, det_class, det_mod8: None, odd: None, oddity: None }
            }
        })
        .collect()
}

/// Jordan splitting of the Z_p-lattice with Gram matrix `q`.
pub fn jordan_decomposition(q: &QuadraticForm, p: u64) -> JordanSplitting {
    let pieces = diagonalize(q, p);
    JordanSplitting { prime: p, constituents: constituents_from_pieces(p, &pieces) }
}
