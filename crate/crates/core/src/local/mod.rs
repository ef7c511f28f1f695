//! Local invariants of quadratic forms at the places of Q.

pub mod jordan;
pub mod padic;
pub mod spinor;
pub mod symbol;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

pub use jordan::{jordan_decomposition, Constituent, JordanSplitting};
pub use padic::{hilbert_symbol, Place, SquareClass};
pub use spinor::{local_spinor_norms, SpinorNormGroup};

use crate::form::QuadraticForm;
use crate::linalg::{bareiss_leading_minors, is_prime, prime_factors, squarefree_part};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalInvariants {
    pub place: Place,
    pub hasse: i8,
    pub det_square_class: SquareClass,
    pub jordan: Option<JordanSplitting>,
}

/// Diagonal entries `d_i / d_{i-1}` of the rational diagonalisation given
/// by leading principal minors in the order `perm`.
fn minor_diagonal(q: &QuadraticForm, perm: &[usize]) -> Vec<BigRational> {
    let n = q.dim();
    let g: Vec<i64> = (0..n * n).map(|k| q.entry(perm[k / n], perm[k % n])).collect();
    let minors = bareiss_leading_minors(n, &g);
    let mut prev = BigInt::one();
    minors
        .into_iter()
        .map(|d| {
            let r = BigRational::new(d.clone(), prev.clone());
            prev = d;
            r
        })
        .collect()
}

fn hasse_of_diagonal(diag: &[BigRational], place: Place) -> i8 {
    let mut h = 1;
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            h *= hilbert_symbol(&diag[i], &diag[j], place);
        }
    }
    h
}

/// Hasse invariant `Π_{i<j} (a_i, a_j)_v` of a rational diagonalisation.
pub fn hasse_invariant(q: &QuadraticForm, place: Place) -> i8 {
    let n = q.dim();
    let forward: Vec<usize> = (0..n).collect();
    let h = hasse_of_diagonal(&minor_diagonal(q, &forward), place);
    debug_assert_eq!(h, hasse_invariant_reversed(q, place));
    h
}

/// The same invariant computed from the reversed basis order.
pub fn hasse_invariant_reversed(q: &QuadraticForm, place: Place) -> i8 {
    let n = q.dim();
    let backward: Vec<usize> = (0..n).rev().collect();
    hasse_of_diagonal(&minor_diagonal(q, &backward), place)
}

pub fn local_invariants(q: &QuadraticForm, place: Place) -> LocalInvariants {
    match place {
        Place::Real => LocalInvariants {
            place,
            hasse: hasse_invariant(q, place),
            det_square_class: 0,
            jordan: None,
        },
        Place::Prime(p) => LocalInvariants {
            place,
            hasse: hasse_invariant(q, place),
            det_square_class: padic::square_class(q.det(), p),
            jordan: Some(jordan_decomposition(q, p)),
        },
    }
}

/// Z_p-equivalence of the lattices (R-equivalence at the real place).
pub fn locally_equivalent(q1: &QuadraticForm, q2: &QuadraticForm, place: Place) -> bool {
    if q1.dim() != q2.dim() {
        return false;
    }
    match place {
        Place::Real => true,
        Place::Prime(2) => {
            let (j1, j2) = (jordan_decomposition(q1, 2), jordan_decomposition(q2, 2));
            symbol::canonical_symbol(&j1) == symbol::canonical_symbol(&j2)
        }
        Place::Prime(p) => {
            let (j1, j2) = (jordan_decomposition(q1, p), jordan_decomposition(q2, p));
            j1.constituents == j2.constituents
        }
    }
}

/// Equal rank and determinant and Z_p-equivalence at every p | 2·det.
pub fn same_genus(q1: &QuadraticForm, q2: &QuadraticForm) -> bool {
    if q1.dim() != q2.dim() || q1.det() != q2.det() {
        return false;
    }
    let mut primes = prime_factors(&(q1.det() * q2.det() * 2));
    primes.dedup();
    primes.into_iter().all(|p| locally_equivalent(q1, q2, Place::Prime(p)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscriminantField {
    Trivial,
    Quadratic { d: i64, field_disc: i64 },
}

impl DiscriminantField {
    pub fn field_disc(&self) -> i64 {
        match self {
            DiscriminantField::Trivial => 1,
            DiscriminantField::Quadratic { field_disc, .. } => *field_disc,
        }
    }
}

/// L = Q for odd rank, otherwise Q(√((−1)^{n/2}·det)).
pub fn discriminant_field(q: &QuadraticForm) -> DiscriminantField {
    let n = q.dim();
    if n % 2 == 1 {
        return DiscriminantField::Trivial;
    }
    let signed = if (n / 2) % 2 == 1 { -q.det().clone() } else { q.det().clone() };
    let d = squarefree_part(&signed);
    if d.is_one() {
        return DiscriminantField::Trivial;
    }
    let d: i64 = i64::try_from(&d).expect("squarefree part fits in i64");
    let field_disc = if d.rem_euclid(4) == 1 { d } else { 4 * d };
    DiscriminantField::Quadratic { d, field_disc }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodPlace {
    pub prime: u64,
    /// `p / (log₂ disc + 2)²`, tracked against the logarithmic bound.
    pub ratio: f64,
    pub log2_disc: f64,
}

/// Smallest prime `p ≥ floor` with `p ∤ 2·det` and `p` unramified in L.
pub fn good_place(q: &QuadraticForm, floor: u64) -> crate::error::Result<GoodPlace> {
    if floor < 3 {
        return Err(crate::error::Error::InvalidArgument(format!("floor must be at least 3, got {floor}")));
    }
    let field_disc = BigInt::from(discriminant_field(q).field_disc()).abs();
    let bad = q.det() * 2 * field_disc;
    let mut p = floor;
    while !(is_prime(p) && (&bad % p) != BigInt::from(0)) {
        p += 1;
    }
    let log2_disc = crate::disc::disc_homogeneous(q)?.log2_disc;
    let ratio = p as f64 / (log2_disc + 2.0).powi(2);
    Ok(GoodPlace { prime: p, ratio, log2_disc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    fn form(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn hilbert_symbol_examples() {
        for place in [Place::Real, Place::Prime(2), Place::Prime(3), Place::Prime(7)] {
            assert_eq!(hilbert_symbol(&r(1), &r(5), place), 1);
        }
        assert_eq!(hilbert_symbol(&r(-1), &r(-1), Place::Real), -1);
        assert_eq!(hilbert_symbol(&r(-1), &r(-1), Place::Prime(2)), -1);
    }

    #[test]
    fn hasse_examples() {
        for place in [Place::Real, Place::Prime(2), Place::Prime(3), Place::Prime(5)] {
            assert_eq!(hasse_invariant(&QuadraticForm::identity(4).unwrap(), place), 1);
        }
        let d = QuadraticForm::diagonal(&[2, 3]).unwrap();
        assert_eq!(hasse_invariant(&d, Place::Prime(5)), hilbert_symbol(&r(2), &r(3), Place::Prime(5)));
        let a2 = form(&[&[2, 1], &[1, 2]]);
        let cleared = QuadraticForm::diagonal(&[2, 6]).unwrap();
        assert_eq!(hasse_invariant(&a2, Place::Prime(3)), hasse_invariant(&cleared, Place::Prime(3)));
        assert_eq!(hasse_invariant(&a2, Place::Prime(3)), hasse_invariant_reversed(&a2, Place::Prime(3)));
    }

    #[test]
    fn hilbert_reciprocity_for_hasse() {
        let forms = [
            form(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 5]]),
            QuadraticForm::diagonal(&[1, 3, 7]).unwrap(),
            form(&[&[2, 1], &[1, 2]]),
            QuadraticForm::diagonal(&[1, 2, 3, 5]).unwrap(),
        ];
        for q in &forms {
            let mut prod = hasse_invariant(q, Place::Real);
            for p in (2u64..200).filter(|&p| is_prime(p)) {
                prod *= hasse_invariant(q, Place::Prime(p));
            }
            assert_eq!(prod, 1, "{q}");
        }
    }

    #[test]
    fn local_equivalence_examples() {
        let i2 = QuadraticForm::identity(2).unwrap();
        for p in [2u64, 3, 5] {
            assert!(locally_equivalent(&i2, &i2, Place::Prime(p)));
        }
        assert!(!locally_equivalent(&i2, &QuadraticForm::diagonal(&[1, 3]).unwrap(), Place::Prime(3)));
        assert!(locally_equivalent(&i2, &QuadraticForm::diagonal(&[2, 2]).unwrap(), Place::Prime(5)));
    }

    #[test]
    fn same_genus_examples() {
        let q = form(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 5]]);
        let u = crate::form::Unimodular::new(3, vec![1, 2, 0, 0, 1, -1, 0, 0, 1]).unwrap();
        assert!(same_genus(&q, &q.transform(&u)));
        assert!(!same_genus(&QuadraticForm::identity(2).unwrap(), &QuadraticForm::diagonal(&[1, 2]).unwrap()));
    }

    #[test]
    fn discriminant_field_examples() {
        assert_eq!(discriminant_field(&QuadraticForm::identity(3).unwrap()), DiscriminantField::Trivial);
        assert_eq!(
            discriminant_field(&QuadraticForm::identity(2).unwrap()),
            DiscriminantField::Quadratic { d: -1, field_disc: -4 }
        );
        assert_eq!(discriminant_field(&QuadraticForm::identity(4).unwrap()), DiscriminantField::Trivial);
    }

    #[test]
    fn good_place_examples() {
        let p = |diag: &[i64]| good_place(&QuadraticForm::diagonal(diag).unwrap(), 3).unwrap().prime;
        assert_eq!(p(&[1, 1, 1]), 3);
        assert_eq!(p(&[1, 1, 9]), 5);
        assert_eq!(p(&[1, 1, 105]), 11);
    }

    /// Brute-force Z_2-equivalence of binary forms: search for a matrix mod
    /// 2^k carrying one Gram matrix to the other mod 2^k.
    fn dyadic_equivalent_brute(a: &QuadraticForm, b: &QuadraticForm, k: u32) -> bool {
        let m = 1i64 << k;
        let md = |x: i64| x.rem_euclid(m);
        for u00 in 0..m {
            for u10 in 0..m {
                let c0 = [u00, u10];
                if md(a.eval(&c0) as i64) != md(b.entry(0, 0)) || (u00 % 2 == 0 && u10 % 2 == 0) {
                    continue;
                }
                for u01 in 0..m {
                    for u11 in 0..m {
                        if (u00 * u11 - u01 * u10) % 2 == 0 {
                            continue;
                        }
                        let c1 = [u01, u11];
                        if md(a.eval(&c1) as i64) == md(b.entry(1, 1))
                            && md(a.bilinear(&c0, &c1) as i64) == md(b.entry(0, 1))
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn dyadic_symbol_matches_brute_force_for_binary_forms() {
        let mut forms = Vec::new();
        for a in 1..=8i64 {
            for b in 0..=a / 2 {
                for c in a..=8i64 {
                    if a * c - b * b > 0 && (a * c - b * b) % 8 != 0 {
                        forms.push(form(&[&[a, b], &[b, c]]));
                    }
                }
            }
        }
        for (i, x) in forms.iter().enumerate() {
            for y in &forms[i + 1..] {
                if x.det() != y.det() {
                    continue;
                }
                let v = crate::linalg::valuation(x.det(), 2);
                let brute = dyadic_equivalent_brute(x, y, v + 3);
                assert_eq!(locally_equivalent(x, y, Place::Prime(2)), brute, "{x} vs {y}");
            }
        }
    }
}
