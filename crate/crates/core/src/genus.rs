//! Kneser p-neighbours, genus enumeration by breadth-first closure, spinor
//! genus partitions and masses.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_form, gram_key, MAX_CANONICAL_DIM};
use crate::error::{Error, Result};
use crate::form::QuadraticForm;
use crate::isometry::{automorphism_order, fingerprint, is_isometric, Fingerprint};
use crate::linalg::{is_prime, lattice_basis, prime_factors};
use crate::lll::lll_reduce;
use crate::local::padic::{self, inverse_mod};
use crate::local::spinor::{self, local_spinor_norms};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeSelection {
    /// A good prime is used when it is the first one or when its class in
    /// the spinor class group is not yet generated by the primes before it.
    SpinorMinimal,
    /// Every good prime up to the budget.
    All,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenusPolicy {
    pub p_max: u64,
    pub class_budget: usize,
    pub selection: PrimeSelection,
    /// Walk the primes from the largest down.
    pub descending: bool,
}

impl Default for GenusPolicy {
    fn default() -> Self {
        GenusPolicy { p_max: 50, class_budget: 20_000, selection: PrimeSelection::SpinorMinimal, descending: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompleteFlag {
    Closed,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusEnumeration {
    pub seed: QuadraticForm,
    /// Index of the seed's class in `classes`.
    pub seed_index: usize,
    /// Canonical representatives (LLL-reduced ones above rank 6), sorted by
    /// their canonical key.
    pub classes: Vec<QuadraticForm>,
    pub aut_orders: Vec<u64>,
    /// `(from, to, p)`: a p-neighbour of `classes[from]` lies in `classes[to]`.
    pub neighbor_edges: Vec<(usize, usize, u64)>,
    pub primes_used: Vec<u64>,
    pub complete_flag: CompleteFlag,
    pub policy: GenusPolicy,
}

impl GenusEnumeration {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.complete_flag == CompleteFlag::Closed
    }
}

/// Odd primes `p ≤ p_max` not dividing `det`.
pub fn good_primes(q: &QuadraticForm, p_max: u64) -> Vec<u64> {
    (3..=p_max).filter(|&p| is_prime(p) && !(q.det() % p).is_zero()).collect()
}

fn residue(x: i128, p: u64) -> u64 {
    x.rem_euclid(p as i128) as u64
}

/// Visits projective points of (Z/p)ⁿ with first nonzero coordinate 1 in
/// lexicographic order.
fn for_each_projective_point(n: usize, p: u64, mut visit: impl FnMut(&[i64])) {
    for lead in 0..n {
        let free = n - lead - 1;
        let mut x = vec![0i64; n];
        x[lead] = 1;
        let total = (p as u128).pow(free as u32);
        for mut idx in 0..total {
            for k in (lead + 1..n).rev() {
                x[k] = (idx % p as u128) as i64;
                idx /= p as u128;
            }
            visit(&x);
        }
    }
}

/// Isotropic lines of `q` mod p as lexicographic representatives.
pub fn isotropic_points(q: &QuadraticForm, p: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_projective_point(q.dim(), p, |x| {
        if residue(q.eval(x), p) == 0 {
            out.push(x.to_vec());
        }
    });
    out
}

/// The neighbour `L_x + Z·x/p` for an isotropic `x` mod p.
fn neighbor_at(q: &QuadraticForm, p: u64, x0: &[i64]) -> QuadraticForm {
    let n = q.dim();
    let pi = p as i128;
    let mut x: Vec<i128> = x0.iter().map(|&v| v as i128).collect();
    let xi64: Vec<i64> = x0.to_vec();
    let ax = q.apply(&xi64);
    let j = (0..n).find(|&k| residue(ax[k], p) != 0).expect("form is nondegenerate mod p");
    let qx = q.eval(&xi64);
    let inv = inverse_mod(&BigInt::from(2 * residue(ax[j], p)), p) as i128;
    let t = (-(qx / pi) * inv).rem_euclid(pi);
    x[j] += pi * t;
    // L_x = {y : B(x, y) ≡ 0 mod p}, generated by p·e_j and e_i − (a_i/a_j)·e_j
    let aj_inv = inverse_mod(&BigInt::from(residue(ax[j], p)), p) as i128;
    let mut gens: Vec<Vec<i128>> = Vec::with_capacity(n + 1);
    let mut pej = vec![0i128; n];
    pej[j] = pi * pi;
    gens.push(pej);
    for i in (0..n).filter(|&i| i != j) {
        let c = (residue(ax[i], p) as i128 * aj_inv).rem_euclid(pi);
        let mut g = vec![0i128; n];
        g[i] = pi;
        g[j] = -c * pi;
        gens.push(g);
    }
    gens.push(x);
    let basis = lattice_basis(n, &gens);
    let a = q.gram();
    let p2 = pi * pi;
    let mut gram = vec![0i64; n * n];
    for r in 0..n {
        for s in r..n {
            let mut acc: i128 = 0;
            for k in 0..n {
                let mut row: i128 = 0;
                for l in 0..n {
                    row += a[k * n + l] as i128 * basis[s][l];
                }
                acc += basis[r][k] * row;
            }
            debug_assert_eq!(acc % p2, 0);
            let v = i64::try_from(acc / p2).expect("neighbour gram overflow");
            gram[r * n + s] = v;
            gram[s * n + r] = v;
        }
    }
    let nb = QuadraticForm::from_flat(n, gram).expect("neighbour is positive definite");
    lll_reduce(&nb).canonical
}

/// One neighbour per isotropic line of `q` mod p, in lexicographic order of
/// the line representatives; each result is LLL-reduced.
pub fn p_neighbors(q: &QuadraticForm, p: u64) -> Result<Vec<QuadraticForm>> {
    if p == 2 {
        return Err(Error::BadPrime(p, "neighbours are only constructed at odd primes"));
    }
    if !is_prime(p) {
        return Err(Error::BadPrime(p, "not a prime"));
    }
    if (q.det() % p).is_zero() {
        return Err(Error::BadPrime(p, "prime divides the determinant"));
    }
    let points = isotropic_points(q, p);
    Ok(points.par_iter().map(|x| neighbor_at(q, p, x)).collect())
}

/// Spinor class group of a genus, as a quotient of the F₂-space
/// ⊕_{p ∈ S} Q_p^×/(Q_p^×)² with S = {2} ∪ {p | det}.
#[derive(Clone, Debug)]
pub struct SpinorClassGroup {
    pub primes: Vec<u64>,
    offsets: Vec<u32>,
    width: u32,
    /// Echelon basis of the relation subgroup, leading bits decreasing.
    relations: Vec<u64>,
}

impl SpinorClassGroup {
    pub fn new(q: &QuadraticForm) -> Result<Self> {
        let mut primes = prime_factors(&(q.det() * 2));
        primes.dedup();
        let mut offsets = Vec::with_capacity(primes.len());
        let mut width = 0u32;
        for &p in &primes {
            offsets.push(width);
            width += if p == 2 { 3 } else { 2 };
        }
        if width > 63 {
            return Err(Error::Unsupported("too many primes divide the determinant".into()));
        }
        let mut g = SpinorClassGroup { primes: primes.clone(), offsets, width, relations: Vec::new() };
        let mut improper = 0u64;
        for (k, &p) in primes.iter().enumerate() {
            let theta = local_spinor_norms(q, p)?;
            for c in theta.generators() {
                g.add_relation((c as u64) << g.offsets[k]);
            }
            let norms = if p == 2 {
                spinor::reflection_norms_dyadic(q)
            } else {
                spinor::reflection_norms_odd(q, p)
            };
            let c = *norms.iter().next().expect("a lattice has reflection vectors");
            improper |= (c as u64) << g.offsets[k];
        }
        g.add_relation(improper);
        for &p in &primes {
            g.add_relation(g.image(p));
        }
        Ok(g)
    }

    fn add_relation(&mut self, v: u64) {
        let r = self.reduce(v);
        if r != 0 {
            self.relations.push(r);
            self.relations.sort_unstable_by(|a, b| b.cmp(a));
        }
    }

    /// Canonical representative of the coset of `v`.
    pub fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.relations {
            v = v.min(v ^ b);
        }
        v
    }

    /// Class of a positive integer in the quotient.
    pub fn image(&self, m: u64) -> u64 {
        let mut v = 0u64;
        for (k, &p) in self.primes.iter().enumerate() {
            v |= (padic::square_class(&BigInt::from(m), p) as u64) << self.offsets[k];
        }
        self.reduce(v)
    }

    pub fn order(&self) -> u64 {
        1u64 << (self.width - self.relations.len() as u32)
    }
}

fn select_primes(q: &QuadraticForm, policy: &GenusPolicy) -> Vec<u64> {
    let mut primes = good_primes(q, policy.p_max);
    if policy.descending {
        primes.reverse();
    }
    let group = match policy.selection {
        PrimeSelection::SpinorMinimal if q.dim() >= 3 => SpinorClassGroup::new(q).ok(),
        _ => None,
    };
    let Some(group) = group else { return primes };
    let mut span: Vec<u64> = Vec::new();
    let mut chosen = Vec::new();
    for p in primes {
        let mut v = group.image(p);
        for &b in &span {
            v = v.min(v ^ b);
        }
        if chosen.is_empty() || v != 0 {
            chosen.push(p);
            if v != 0 {
                span.push(v);
                span.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
    }
    chosen
}

struct Registry {
    reps: Vec<QuadraticForm>,
    buckets: HashMap<Fingerprint, Vec<usize>>,
}

impl Registry {
    fn find(&self, q: &QuadraticForm, fp: &Fingerprint) -> Option<usize> {
        let bucket = self.buckets.get(fp)?;
        bucket.iter().copied().find(|&i| self.reps[i] == *q || is_isometric(q, &self.reps[i]).is_some())
    }

    fn insert(&mut self, q: QuadraticForm, fp: Fingerprint) -> usize {
        let idx = self.reps.len();
        self.reps.push(q);
        self.buckets.entry(fp).or_default().push(idx);
        idx
    }
}

fn representative(q: &QuadraticForm) -> Result<QuadraticForm> {
    if q.dim() <= MAX_CANONICAL_DIM {
        Ok(canonical_form(q)?.canonical)
    } else {
        Ok(lll_reduce(q).canonical)
    }
}

fn finish(
    seed: &QuadraticForm,
    reps: Vec<QuadraticForm>,
    edges: BTreeSet<(usize, usize, u64)>,
    primes: Vec<u64>,
    flag: CompleteFlag,
    policy: &GenusPolicy,
) -> Result<GenusEnumeration> {
    let canon: Vec<QuadraticForm> = reps.par_iter().map(representative).collect::<Result<_>>()?;
    let auts: Vec<u64> = canon.par_iter().map(automorphism_order).collect();
    let mut order: Vec<usize> = (0..canon.len()).collect();
    order.sort_by_cached_key(|&i| gram_key(&canon[i]));
    let mut new_index = vec![0usize; canon.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let neighbor_edges: BTreeSet<(usize, usize, u64)> =
        edges.into_iter().map(|(a, b, p)| (new_index[a], new_index[b], p)).collect();
    Ok(GenusEnumeration {
        seed: seed.clone(),
        seed_index: new_index[0],
        classes: order.iter().map(|&i| canon[i].clone()).collect(),
        aut_orders: order.iter().map(|&i| auts[i]).collect(),
        neighbor_edges: neighbor_edges.into_iter().collect(),
        primes_used: primes,
        complete_flag: flag,
        policy: policy.clone(),
    })
}

/// Breadth-first closure of the class of `q` under p-neighbours.
///
/// Discovering a class beyond `policy.class_budget` stops the search with
/// [`Error::BudgetExhausted`] carrying everything found so far.
pub fn genus_enumerate(q: &QuadraticForm, policy: &GenusPolicy) -> Result<GenusEnumeration> {
    if policy.class_budget == 0 {
        return Err(Error::InvalidArgument("class budget must be positive".into()));
    }
    let primes = select_primes(q, policy);
    let start = lll_reduce(q).canonical;
    let mut reg = Registry { reps: Vec::new(), buckets: HashMap::new() };
    let fp = fingerprint(&start);
    reg.insert(start, fp);
    let mut edges: BTreeSet<(usize, usize, u64)> = BTreeSet::new();
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);
    while !frontier.is_empty() {
        let layer: Vec<usize> = frontier.drain(..).collect();
        let jobs: Vec<(usize, u64)> = layer.iter().flat_map(|&i| primes.iter().map(move |&p| (i, p))).collect();
        let found: Vec<Vec<(QuadraticForm, Fingerprint)>> = jobs
            .par_iter()
            .map(|&(i, p)| {
                let nbs = p_neighbors(&reg.reps[i], p)?;
                Ok(nbs.into_iter().map(|nb| {
                    let fp = fingerprint(&nb);
                    (nb, fp)
                }).collect())
            })
            .collect::<Result<_>>()?;
        for (&(src, p), nbs) in jobs.iter().zip(found) {
            for (nb, fp) in nbs {
                let dst = match reg.find(&nb, &fp) {
                    Some(j) => j,
                    None => {
                        if reg.reps.len() >= policy.class_budget {
                            let partial =
                                finish(q, reg.reps, edges, primes, CompleteFlag::BudgetExhausted, policy)?;
                            return Err(Error::BudgetExhausted(Box::new(partial)));
                        }
                        let j = reg.insert(nb, fp);
                        frontier.push_back(j);
                        j
                    }
                };
                edges.insert((src, dst, p));
            }
        }
    }
    finish(q, reg.reps, edges, primes, CompleteFlag::Closed, policy)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinorPartition {
    /// Per-class coset representative in the spinor class group (seed = 0).
    pub labels: Vec<u64>,
    pub group_order: u64,
}

impl SpinorPartition {
    /// Class counts per distinct label, ordered by label.
    pub fn sizes(&self) -> BTreeMap<u64, usize> {
        let mut m = BTreeMap::new();
        for &l in &self.labels {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }

    pub fn spinor_genus_count(&self) -> usize {
        self.sizes().len()
    }
}

/// Labels every class by its spinor genus: a q-neighbour edge shifts the
/// label by the class of q, and every edge of the neighbour graph must be
/// consistent with the labels propagated along a spanning tree.
pub fn spin_genus_partition(g: &GenusEnumeration) -> Result<SpinorPartition> {
    let group = SpinorClassGroup::new(&g.seed)?;
    let k = g.classes.len();
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); k];
    for &(a, b, p) in &g.neighbor_edges {
        adj[a].push((b, p));
        adj[b].push((a, p));
    }
    let mut labels: Vec<Option<u64>> = vec![None; k];
    labels[g.seed_index] = Some(0);
    let mut queue = VecDeque::from([g.seed_index]);
    while let Some(i) = queue.pop_front() {
        let li = labels[i].expect("queued classes are labelled");
        for &(j, p) in &adj[i] {
            let expect = group.reduce(li ^ group.image(p));
            match labels[j] {
                None => {
                    labels[j] = Some(expect);
                    queue.push_back(j);
                }
                Some(lj) if lj != expect => {
                    return Err(Error::InconsistentSpinorData(format!(
                        "edge {i} -> {j} at p = {p} gives label {expect:#b}, found {lj:#b}"
                    )))
                }
                Some(_) => {}
            }
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::InconsistentSpinorData(format!("class {i} is not connected"))))
        .collect::<Result<Vec<u64>>>()?;
    Ok(SpinorPartition { labels, group_order: group.order() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassWeighting {
    Full,
    PerSpinor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassValue {
    pub total: BigRational,
    /// `(label, mass)` per spinor genus, filled for [`MassWeighting::PerSpinor`].
    pub per_spinor: Vec<(u64, BigRational)>,
}

/// `Σ 1/|Aut|` over the classes, optionally split by spinor genus.
pub fn genus_mass(g: &GenusEnumeration, weighting: MassWeighting) -> Result<MassValue> {
    let term = |a: u64| BigRational::new(BigInt::one(), BigInt::from(a));
    let total: BigRational = g.aut_orders.iter().map(|&a| term(a)).sum();
    let per_spinor = match weighting {
        MassWeighting::Full => Vec::new(),
        MassWeighting::PerSpinor => {
            let part = spin_genus_partition(g)?;
            let mut m: BTreeMap<u64, BigRational> = BTreeMap::new();
            for (&l, &a) in part.labels.iter().zip(&g.aut_orders) {
                *m.entry(l).or_insert_with(BigRational::zero) += term(a);
            }
            m.into_iter().collect()
        }
    };
    Ok(MassValue { total, per_spinor })
}
