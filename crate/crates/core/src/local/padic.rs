//! Square classes of Q_p^× and Hilbert symbols.
//!
//! A square class is packed into a `u8` so that multiplication is XOR:
//! bit 0 is the parity of the valuation; for odd p bit 1 marks a
//! non-residue unit; for p = 2 bits 1 and 2 hold ε(u) = (u−1)/2 and
//! ω(u) = (u²−1)/8 of the unit part mod 2.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::valuation;

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Real,
    Prime(u64),
}

pub type SquareClass = u8;

/// Splits a nonzero integer as `p^v · u` with `p ∤ u`.
pub fn split_valuation(x: &BigInt, p: u64) -> (u32, BigInt) {
    let v = valuation(x, p);
    (v, x / BigInt::from(p).pow(v))
}

/// `x mod m` in `0..m`.
pub fn residue(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128;
    let mut bb = (b % m) as u128;
    let mm = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    b = r as u64;
    b
}

/// Legendre symbol (a | p) for odd prime p, as ±1 or 0.
pub fn legendre(a: &BigInt, p: u64) -> i8 {
    let r = residue(a, p);
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Legendre symbol for a small integer.
pub fn legendre_u64(a: u64, p: u64) -> i8 {
    legendre(&BigInt::from(a), p)
}

fn eps2(u: u64) -> u8 {
    (((u % 8) - 1) / 2 % 2) as u8
}

fn omega2(u: u64) -> u8 {
    let u = u % 8;
    (((u * u - 1) / 8) % 2) as u8
}

/// Square class of a nonzero integer in Q_p^×/(Q_p^×)².
pub fn square_class(x: &BigInt, p: u64) -> SquareClass {
    let (v, u) = split_valuation(x, p);
    let vbit = (v % 2) as u8;
    if p == 2 {
        let r = residue(&u, 8);
        vbit | eps2(r) << 1 | omega2(r) << 2
    } else {
        vbit | u8::from(legendre(&u, p) == -1) << 1
    }
}

/// Square class of a nonzero rational.
pub fn square_class_rational(x: &BigRational, p: u64) -> SquareClass {
    square_class(x.numer(), p) ^ square_class(x.denom(), p)
}

/// The class `p^v · u` for a unit `u` given by its residue (mod 8 when p = 2,
/// mod p otherwise).
pub fn class_from_parts(p: u64, v: u32, unit_residue: u64) -> SquareClass {
    square_class(&(BigInt::from(p).pow(v) * BigInt::from(unit_residue)), p)
}

/// Number of square classes in Q_p^×.
pub fn class_count(p: u64) -> usize {
    if p == 2 {
        8
    } else {
        4
    }
}

/// Integer in the same square class as the rational `x` (numerator·denominator).
fn integral_rep(x: &BigRational) -> BigInt {
    x.numer() * x.denom()
}

/// Hilbert symbol `(a, b)_v` of nonzero rationals.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: Place) -> i8 {
    assert!(!a.is_zero() && !b.is_zero(), "Hilbert symbol of zero");
    let (a, b) = (integral_rep(a), integral_rep(b));
    hilbert_symbol_int(&a, &b, place)
}

pub fn hilbert_symbol_int(a: &BigInt, b: &BigInt, place: Place) -> i8 {
    match place {
        Place::Real => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Prime(2) => {
            let (alpha, u) = split_valuation(a, 2);
            let (beta, v) = split_valuation(b, 2);
            let (u, v) = (residue(&u, 8), residue(&v, 8));
            let e = eps2(u) as u32 * eps2(v) as u32 + alpha * omega2(v) as u32 + beta * omega2(u) as u32;
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Prime(p) => {
            let (alpha, u) = split_valuation(a, p);
            let (beta, v) = split_valuation(b, p);
            let mut s: i8 = if (alpha as u64 * beta as u64 * ((p - 1) / 2)) % 2 == 1 { -1 } else { 1 };
            if beta % 2 == 1 {
                s *= legendre(&u, p);
            }
            if alpha % 2 == 1 {
                s *= legendre(&v, p);
            }
            s
        }
    }
}

/// Inverse of an odd residue modulo `2^k` or of a unit modulo odd `m`.
pub fn inverse_mod(a: &BigInt, m: u64) -> u64 {
    let m_big = BigInt::from(m);
    let ext = a.mod_floor(&m_big).extended_gcd(&m_big);
    debug_assert!(ext.gcd.is_one());
    ext.x.mod_floor(&m_big).to_u64().expect("fits")
}

/// Residue of a p-adic unit rational modulo `m` (a power of p).
pub fn rational_residue(x: &BigRational, m: u64) -> u64 {
    let num = residue(x.numer(), m);
    let den_inv = inverse_mod(x.denom(), m);
    ((num as u128 * den_inv as u128) % m as u128) as u64
}
