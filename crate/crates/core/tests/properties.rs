use genuslab_core::disc::{disc_homogeneous, pluecker_primitive, so_lie_basis};
use genuslab_core::equid::{equid_experiment, normalize_unit_det, siegel_count, Weighting};
use genuslab_core::genus::{genus_enumerate, p_neighbors, GenusEnumeration, GenusPolicy};
use genuslab_core::local::{hasse_invariant, jordan_decomposition, same_genus, Place};
use genuslab_core::{canonical_form, is_isometric, lll_reduce, QuadraticForm, Unimodular};
use proptest::prelude::*;

/// Positive-definite forms built as diagonally dominant symmetric matrices.
fn form_strategy(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = QuadraticForm> {
    dims.prop_flat_map(|n| {
        let off = n * (n - 1) / 2;
        (proptest::collection::vec(-3i64..=3, off), proptest::collection::vec(0i64..=6, n)).prop_map(
            move |(offs, extra)| {
                let mut g = vec![0i64; n * n];
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        g[i * n + j] = offs[k];
                        g[j * n + i] = offs[k];
                        k += 1;
                    }
                }
                for i in 0..n {
                    let row: i64 = (0..n).filter(|&j| j != i).map(|j| g[i * n + j].abs()).sum();
                    g[i * n + i] = row + 1 + extra[i];
                }
                QuadraticForm::from_flat(n, g).unwrap()
            },
        )
    })
}

/// Unimodular matrices as products of elementary transvections and swaps.
fn unimodular_strategy(n: usize) -> impl Strategy<Value = Unimodular> {
    proptest::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 1..8).prop_map(move |ops| {
        let mut u = Unimodular::identity(n);
        for (i, j, c, swap) in ops {
            let mut e: Vec<i64> = (0..n * n).map(|k| i64::from(k / n == k % n)).collect();
            if i != j {
                if swap {
                    e[i * n + i] = 0;
                    e[j * n + j] = 0;
                    e[i * n + j] = 1;
                    e[j * n + i] = 1;
                } else {
                    e[i * n + j] = c;
                }
            }
            u = u.mul(&Unimodular::new(n, e).unwrap());
        }
        u
    })
}

fn form_and_change(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (QuadraticForm, Unimodular)> {
    form_strategy(dims).prop_flat_map(|q| {
        let n = q.dim();
        (Just(q), unimodular_strategy(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lll_witness_maps_to_reduced(q in form_strategy(2..=5)) {
        let red = lll_reduce(&q);
        prop_assert_eq!(q.transform(&red.witness), red.canonical);
    }

    #[test]
    fn canonical_form_is_a_class_invariant((q, u) in form_and_change(2..=4)) {
        let a = canonical_form(&q).unwrap();
        let b = canonical_form(&q.transform(&u)).unwrap();
        prop_assert_eq!(&a.canonical, &b.canonical);
        prop_assert_eq!(q.transform(&a.witness), a.canonical);
    }

    #[test]
    fn isometry_witness_is_exact((q, u) in form_and_change(2..=5)) {
        let moved = q.transform(&u);
        let w = is_isometric(&q, &moved).expect("equivalent forms");
        prop_assert_eq!(q.transform(&w), moved);
    }

    #[test]
    fn jordan_valuations_reconstruct_det(q in form_strategy(2..=4), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let j = jordan_decomposition(&q, p);
        prop_assert_eq!(j.total_dim(), q.dim());
        prop_assert_eq!(j.det_valuation(), genuslab_core::linalg::valuation(q.det(), p));
        prop_assert!(j.constituents.windows(2).all(|w| w[0].scale < w[1].scale));
    }

    #[test]
    fn hasse_reciprocity(q in form_strategy(2..=4)) {
        let mut prod = hasse_invariant(&q, Place::Real);
        let minors = genuslab_core::linalg::bareiss_leading_minors(q.dim(), q.gram());
        let product: num_bigint::BigInt = minors.iter().product::<num_bigint::BigInt>() * 2;
        let mut primes = genuslab_core::linalg::prime_factors(&product);
        primes.dedup();
        for p in primes {
            prod *= hasse_invariant(&q, Place::Prime(p));
        }
        prop_assert_eq!(prod, 1);
    }

    #[test]
    fn equivalent_forms_share_their_genus((q, u) in form_and_change(2..=4)) {
        prop_assert!(same_genus(&q, &q.transform(&u)));
    }

    #[test]
    fn disc_is_equivalence_invariant((q, u) in form_and_change(2..=4)) {
        let a = disc_homogeneous(&q).unwrap();
        let b = disc_homogeneous(&q.transform(&u)).unwrap();
        prop_assert_eq!(a.norm_sq, b.norm_sq);
    }

    #[test]
    fn pluecker_ignores_basis_choice(q in form_strategy(2..=3), w in unimodular_strategy(3)) {
        let b = so_lie_basis(&q).unwrap();
        let w = if b.r == 3 { w.entries().to_vec() } else { vec![-1] };
        prop_assert_eq!(pluecker_primitive(&b).unwrap(), pluecker_primitive(&b.recombine(&w)).unwrap());
    }

    #[test]
    fn neighbours_have_equal_det_and_genus(q in form_strategy(2..=4), p in prop::sample::select(vec![3u64, 5, 7, 11])) {
        prop_assume!(!(q.det() % p == num_bigint::BigInt::from(0)));
        for nb in p_neighbors(&q, p).unwrap() {
            prop_assert_eq!(nb.det(), q.det());
            prop_assert!(same_genus(&nb, &q));
        }
    }

    #[test]
    fn siegel_count_is_scale_invariant(q in form_strategy(2..=3), c in 2i64..=5, r in 0.5f64..3.0) {
        let a = siegel_count(&normalize_unit_det(&q), r).unwrap();
        let b = siegel_count(&normalize_unit_det(&q.scaled(c).unwrap()), r).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn replace_representatives(g: &GenusEnumeration, u: &Unimodular) -> GenusEnumeration {
    let mut h = g.clone();
    h.classes = g.classes.iter().map(|q| q.transform(u)).collect();
    h.classes.reverse();
    h.aut_orders.reverse();
    h.seed_index = h.classes.len() - 1 - g.seed_index;
    h
}

#[test]
fn equid_ignores_order_and_representatives() {
    let g = genus_enumerate(&QuadraticForm::diagonal(&[1, 1, 73]).unwrap(), &GenusPolicy::default()).unwrap();
    assert!(g.len() >= 2);
    let u = Unimodular::new(3, vec![1, 1, 0, 0, 1, -2, 0, 0, 1]).unwrap();
    let h = replace_representatives(&g, &u);
    for w in [Weighting::Mass, Weighting::Uniform] {
        let a = equid_experiment(&g, &[1.0, 2.0, 3.0], w).unwrap();
        let b = equid_experiment(&h, &[1.0, 2.0, 3.0], w).unwrap();
        assert_eq!(a.empirical, b.empirical);
        assert_eq!(a.sup_discrepancy, b.sup_discrepancy);
    }
}
