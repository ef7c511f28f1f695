//! Local spinor norm groups θ(O⁺(L_p)) ⊆ Q_p^×/(Q_p^×)².
//!
//! The group is generated by products of pairs of norms of reflection
//! vectors of L_p. For odd p the reflection norms are read off the Jordan
//! splitting; for p = 2 they are found by an exact search over residues of
//! the block-diagonal pieces.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::jordan::{self, Piece};
use super::padic::{self, SquareClass};
use crate::error::{Error, Result};
use crate::form::QuadraticForm;

/// A subgroup of Q_p^×/(Q_p^×)², stored as its sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinorNormGroup {
    pub prime: u64,
    pub elements: Vec<SquareClass>,
}

impl SpinorNormGroup {
    pub fn contains(&self, c: SquareClass) -> bool {
        self.elements.contains(&c)
    }

    /// True when every unit square class is present.
    pub fn contains_all_units(&self) -> bool {
        let units: Vec<SquareClass> = (0..padic::class_count(self.prime) as u8).filter(|c| c & 1 == 0).collect();
        units.iter().all(|&u| self.contains(u))
    }

    pub fn is_full(&self) -> bool {
        self.elements.len() == padic::class_count(self.prime)
    }

    /// Basis of the group as an F₂-space (row echelon over the bit vectors).
    pub fn generators(&self) -> Vec<SquareClass> {
        let mut basis: Vec<SquareClass> = Vec::new();
        for &e in &self.elements {
            let mut x = e;
            for &b in &basis {
                x = x.min(x ^ b);
            }
            if x != 0 {
                basis.push(x);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        basis
    }
}

/// F₂-span of a set of classes.
pub fn span(gens: impl IntoIterator<Item = SquareClass>) -> Vec<SquareClass> {
    let mut set: BTreeSet<SquareClass> = BTreeSet::from([0]);
    for g in gens {
        let extra: Vec<SquareClass> = set.iter().map(|&x| x ^ g).collect();
        set.extend(extra);
    }
    set.into_iter().collect()
}

/// The group generated by all products of two reflection norms.
pub fn group_from_reflection_norms(p: u64, norms: &BTreeSet<SquareClass>) -> SpinorNormGroup {
    let pairs: Vec<SquareClass> =
        norms.iter().flat_map(|&a| norms.iter().map(move |&b| a ^ b)).collect();
    SpinorNormGroup { prime: p, elements: span(pairs) }
}

/// Reflection norm classes of an odd-p lattice from its Jordan splitting:
/// a constituent of rank ≥ 2 at scale k represents every unit times p^k,
/// a rank-1 constituent only its own class.
pub fn reflection_norms_odd(q: &QuadraticForm, p: u64) -> BTreeSet<SquareClass> {
    let split = jordan::jordan_decomposition(q, p);
    let mut out = BTreeSet::new();
    for c in &split.constituents {
        let vbit = (c.scale % 2) as u8;
        if c.dim >= 2 {
            out.insert(vbit);
            out.insert(vbit | 2);
        } else {
            out.insert(vbit | c.det_class);
        }
    }
    out
}

/// Values mod 16 of a unimodular dyadic piece on primitive vectors.
fn piece_values(piece: &Piece) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    match piece {
        Piece::One { unit, .. } => {
            let u = padic::rational_residue(unit, 16);
            for y in (1..16u64).step_by(2) {
                out.insert(u * y * y % 16);
            }
        }
        Piece::Two { a, b, c, .. } => {
            let (a, b, c) = (
                residue16(a),
                padic::rational_residue(b, 16),
                residue16(c),
            );
            for y1 in 0..16u64 {
                for y2 in 0..16u64 {
                    if y1 % 2 == 0 && y2 % 2 == 0 {
                        continue;
                    }
                    out.insert((a * y1 * y1 + 2 * b * y1 * y2 + c * y2 * y2) % 16);
                }
            }
        }
    }
    out
}

/// Residue mod 16 of a 2-integral rational that need not be a unit.
fn residue16(x: &BigRational) -> u64 {
    let den_inv = padic::inverse_mod(x.denom(), 16);
    (padic::residue(x.numer(), 16) * den_inv) % 16
}

/// Reflection norm classes of the dyadic lattice.
///
/// A reflection vector `v` has `B(v, L) = 2^m` and `v₂(Q(v)) ∈ {m, m+1}`.
/// Writing `v` piecewise as `2^t·y` with `y` primitive, each piece adds
/// `2^{a+2t}·q(y)` to `Q(v)` and `2^{a+t}` to `B(v, L)`; everything is
/// determined by `Q(v)/2^m mod 16`, which a small subset-sum over residues
/// covers exactly.
pub fn reflection_norms_dyadic(q: &QuadraticForm) -> BTreeSet<SquareClass> {
    let pieces = jordan::diagonalize(q, 2);
    let values: Vec<BTreeSet<u64>> = pieces.iter().map(piece_values).collect();
    let lo = pieces.iter().map(Piece::scale).min().expect("nonempty");
    let hi = pieces.iter().map(Piece::scale).max().expect("nonempty");
    let mut out = BTreeSet::new();
    for m in lo..=hi {
        // state: (Q(v)/2^m mod 16, some piece attains B(v,L) = 2^m)
        let mut states: BTreeSet<(u64, bool)> = BTreeSet::from([(0, false)]);
        for (piece, vals) in pieces.iter().zip(&values) {
            let a = piece.scale();
            let t0 = m.saturating_sub(a);
            let mut options: BTreeSet<(u64, bool)> = BTreeSet::from([(0, false)]);
            for t in t0..t0 + 5 {
                let e = a + 2 * t - m;
                let active = a + t == m;
                for &val in vals {
                    let contrib = if e >= 4 { 0 } else { (val << e) % 16 };
                    options.insert((contrib, active));
                }
            }
            states = states
                .iter()
                .flat_map(|&(s, act)| options.iter().map(move |&(c, a2)| ((s + c) % 16, act || a2)))
                .collect();
        }
        for (s, active) in states {
            if !active {
                continue;
            }
            if s % 2 == 1 {
                out.insert(padic::class_from_parts(2, m, s % 8));
            } else if s % 4 == 2 {
                out.insert(padic::class_from_parts(2, m + 1, (s / 2) % 8));
            }
        }
    }
    out
}

/// θ(O⁺(L_p)) for the lattice of `q` at the prime `p`.
///
/// At p = 2 the reflection-generated group is returned when it is already
/// the full class group or when every Jordan constituent is of type I;
/// lattices with an even constituent otherwise fall outside the supported
/// table and yield `Unsupported`.
pub fn local_spinor_norms(q: &QuadraticForm, p: u64) -> Result<SpinorNormGroup> {
    if p != 2 {
        return Ok(group_from_reflection_norms(p, &reflection_norms_odd(q, p)));
    }
    let g = group_from_reflection_norms(2, &reflection_norms_dyadic(q));
    if g.is_full() {
        return Ok(g);
    }
    let split = jordan::jordan_decomposition(q, 2);
    if split.constituents.iter().all(|c| c.odd == Some(true)) {
        Ok(g)
    } else {
        Err(Error::Unsupported(format!(
            "dyadic spinor norms for a lattice with an even Jordan constituent ({q})"
        )))
    }
}

/// Explicit reflection search over a coordinate box (test oracle).
pub fn reflection_norms_by_search(q: &QuadraticForm, p: u64, radius: i64) -> BTreeSet<SquareClass> {
    let n = q.dim();
    let mut out = BTreeSet::new();
    let mut x = vec![-radius; n];
    loop {
        if x.iter().any(|&c| c != 0) {
            let qv = BigInt::from(q.eval(&x));
            let av = q.apply(&x);
            let vq = crate::linalg::valuation(&qv, p);
            let ok = av.iter().all(|&c| {
                c == 0 || vq <= crate::linalg::valuation(&BigInt::from(2 * c), p)
            });
            if ok {
                out.insert(padic::square_class(&qv, p));
            }
        }
        let mut i = 0;
        loop {
            if i == n {
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
