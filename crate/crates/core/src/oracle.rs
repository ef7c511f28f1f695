//! Brute-force class lists of small forms, used to certify enumerations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::QuadraticForm;
use crate::genus::GenusEnumeration;
use crate::isometry::{fingerprint, is_isometric, Fingerprint};
use crate::local::same_genus;

/// Largest determinant accepted by [`completeness_check`].
pub const ORACLE_MAX_DET: i64 = 200;

fn dedupe(forms: Vec<QuadraticForm>) -> Vec<QuadraticForm> {
    let mut out: Vec<QuadraticForm> = Vec::new();
    let mut buckets: HashMap<Fingerprint, Vec<usize>> = HashMap::new();
    for q in forms {
        let fp = fingerprint(&q);
        let bucket = buckets.entry(fp).or_default();
        if bucket.iter().any(|&i| is_isometric(&q, &out[i]).is_some()) {
            continue;
        }
        bucket.push(out.len());
        out.push(q);
    }
    out
}

fn binary_reduced(det: i64) -> Vec<QuadraticForm> {
    let mut out = Vec::new();
    // a ≤ c, |2b| ≤ a, so 3a²/4 ≤ ac − b² = det
    let mut a = 1;
    while 3 * a * a <= 4 * det {
        for b in -a / 2..=a / 2 {
            let num = det + b * b;
            if num % a == 0 && num / a >= a {
                out.push(QuadraticForm::new(vec![vec![a, b], vec![b, num / a]]).expect("reduced form"));
            }
        }
        a += 1;
    }
    out
}

fn ternary_reduced(det: i64) -> Vec<QuadraticForm> {
    let mut out = Vec::new();
    // a ≤ b ≤ c, |2·g12|, |2·g13| ≤ a, |2·g23| ≤ b and abc ≤ 2·det
    let mut a = 1;
    while a * a * a <= 2 * det {
        let mut b = a;
        while a * b * b <= 2 * det {
            for g12 in -a / 2..=a / 2 {
                let m = a * b - g12 * g12;
                for g13 in -a / 2..=a / 2 {
                    for g23 in -b / 2..=b / 2 {
                        let num = det + a * g23 * g23 - 2 * g12 * g23 * g13 + b * g13 * g13;
                        if num % m != 0 {
                            continue;
                        }
                        let c = num / m;
                        if c < b || a * b * c > 2 * det {
                            continue;
                        }
                        let rows = vec![vec![a, g12, g13], vec![g12, b, g23], vec![g13, g23, c]];
                        if let Ok(q) = QuadraticForm::new(rows) {
                            out.push(q);
                        }
                    }
                }
            }
            b += 1;
        }
        a += 1;
    }
    out
}

/// A positive-definite unimodular lattice of rank ≤ 7 has minimum 1
/// (Hermite's constant is below 2 there), so a norm-1 vector splits off
/// and the lattice is Iₙ by induction.
fn unimodular_small_rank(n: usize) -> Vec<QuadraticForm> {
    vec![QuadraticForm::identity(n).expect("valid rank")]
}

/// All isometry classes of positive-definite forms of rank `n` and the
/// given determinant, for `n ∈ {2, 3}` or determinant 1 with `n ≤ 7`.
pub fn reduced_forms(n: usize, det: i64) -> Result<Vec<QuadraticForm>> {
    if det < 1 {
        return Err(Error::InvalidArgument(format!("determinant must be positive, got {det}")));
    }
    match n {
        2 => Ok(dedupe(binary_reduced(det))),
        3 => Ok(dedupe(ternary_reduced(det))),
        4..=7 if det == 1 => Ok(unimodular_small_rank(n)),
        _ => Err(Error::OracleOutOfRange(format!("no reduced-form oracle for n = {n}, det = {det}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub matches: bool,
    pub oracle_classes: usize,
    pub enumerated_classes: usize,
    /// Oracle classes absent from the enumeration.
    pub missing: Vec<QuadraticForm>,
    /// Enumerated classes absent from the oracle list.
    pub extra: Vec<QuadraticForm>,
}

/// Compares an enumeration with the brute-force class list of its genus.
pub fn completeness_check(g: &GenusEnumeration) -> Result<CompletenessReport> {
    let n = g.seed.dim();
    let det = i64::try_from(g.seed.det()).unwrap_or(i64::MAX);
    if !(2..=3).contains(&n) || det > ORACLE_MAX_DET {
        return Err(Error::OracleOutOfRange(format!(
            "oracle window is n ∈ {{2, 3}} and det ≤ {ORACLE_MAX_DET}; got n = {n}, det = {det}"
        )));
    }
    let oracle: Vec<QuadraticForm> =
        reduced_forms(n, det)?.into_iter().filter(|q| same_genus(q, &g.seed)).collect();
    let missing: Vec<QuadraticForm> = oracle
        .iter()
        .filter(|o| !g.classes.iter().any(|c| is_isometric(o, c).is_some()))
        .cloned()
        .collect();
    let extra: Vec<QuadraticForm> = g
        .classes
        .iter()
        .filter(|c| !oracle.iter().any(|o| is_isometric(o, c).is_some()))
        .cloned()
        .collect();
    Ok(CompletenessReport {
        matches: missing.is_empty() && extra.is_empty() && oracle.len() == g.classes.len(),
        oracle_classes: oracle.len(),
        enumerated_classes: g.classes.len(),
        missing,
        extra,
    })
}
