//! Canonical 2-adic genus symbols (oddity fusion and sign walking).

use serde::{Deserialize, Serialize};

use super::jordan::JordanSplitting;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub scale: u32,
    pub dim: usize,
    /// +1 when the unit determinant is ±1 mod 8, −1 when it is ±3 mod 8.
    pub sign: i8,
    pub odd: bool,
    pub oddity: u8,
}

/// Raw symbol read off a dyadic Jordan splitting.
pub fn raw_symbol(j: &JordanSplitting) -> Vec<SymbolEntry> {
    assert_eq!(j.prime, 2);
    j.constituents
        .iter()
        .map(|c| {
            let d = c.det_mod8.expect("dyadic data");
            SymbolEntry {
                scale: c.scale,
                dim: c.dim,
                sign: if d == 1 || d == 7 { 1 } else { -1 },
                odd: c.odd.expect("dyadic data"),
                oddity: c.oddity.expect("dyadic data"),
            }
        })
        .collect()
}

/// Maximal runs of type I constituents at consecutive scales.
fn compartments(sym: &[SymbolEntry]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, e) in sym.iter().enumerate() {
        if !e.odd {
            continue;
        }
        match out.last_mut() {
            Some(last) if {
                let prev = *last.last().expect("nonempty");
                prev + 1 == i && sym[prev].scale + 1 == e.scale
            } => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Maximal runs in which neighbouring constituents (with empty constituents
/// at skipped scales counting as even) are never both even.
fn trains(sym: &[SymbolEntry]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..sym.len() {
        let joins = i > 0 && {
            let (prev, cur) = (&sym[i - 1], &sym[i]);
            match cur.scale - prev.scale {
                1 => prev.odd || cur.odd,
                2 => prev.odd && cur.odd,
                _ => false,
            }
        };
        if joins {
            out.last_mut().expect("train exists").push(i);
        } else {
            out.push(vec![i]);
        }
    }
    out
}

/// Canonical form of a 2-adic symbol: compartment oddities are fused onto
/// the first member, and signs are walked to the front of each train.
pub fn canonical_symbol(j: &JordanSplitting) -> Vec<SymbolEntry> {
    let mut sym = raw_symbol(j);
    let comps = compartments(&sym);
    let comp_of = |i: usize| comps.iter().position(|c| c.contains(&i));
    for c in &comps {
        let total: u32 = c.iter().map(|&i| sym[i].oddity as u32).sum();
        for &i in c {
            sym[i].oddity = 0;
        }
        sym[c[0]].oddity = (total % 8) as u8;
    }
    for train in trains(&sym) {
        for w in (1..train.len()).rev() {
            let (t, s) = (train[w], train[w - 1]);
            if sym[t].sign == 1 {
                continue;
            }
            sym[t].sign = 1;
            sym[s].sign = -sym[s].sign;
            let mut touched: Vec<usize> = Vec::new();
            if sym[t].scale - sym[s].scale == 1 {
                // one compartment absorbs the change
                if let Some(c) = comp_of(s).or_else(|| comp_of(t)) {
                    touched.push(c);
                }
            } else {
                touched.extend(comp_of(s));
                touched.extend(comp_of(t));
            }
            for c in touched {
                let first = comps[c][0];
                sym[first].oddity = (sym[first].oddity + 4) % 8;
            }
        }
    }
    sym
}
