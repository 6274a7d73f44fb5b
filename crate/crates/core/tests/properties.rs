use num_bigint::BigInt;
use proptest::prelude::*;
use sparsetrace::mixedvol::mixed_volume;
use sparsetrace::polysys::{random_system, SegmentFamily, SparseSystem, TorusPoint};
use sparsetrace::scalar::C;
use sparsetrace::supports::{
    collection_lattice, has_positive_mixed_volume_by_defect, rectangle_points, simplex_points,
    LatticePoint, MonomialMap, Support, SupportCollection,
};

fn support_strategy(n: usize, max_points: usize, coord: i64) -> impl Strategy<Value = Support> {
    prop::collection::btree_set(prop::collection::vec(0..=coord, n), 1..=max_points).prop_map(
        move |rows| {
            let rows: Vec<Vec<i64>> = rows.into_iter().collect();
            Support::from_rows(n, &rows).expect("valid rows")
        },
    )
}

fn collection_strategy(
    n: usize,
    max_points: usize,
    coord: i64,
) -> impl Strategy<Value = SupportCollection> {
    prop::collection::vec(support_strategy(n, max_points, coord), n)
        .prop_map(move |s| SupportCollection::new(n, s).expect("valid collection"))
}

/// Products of elementary shears and swaps, so the determinant is ±1.
fn unimodular_strategy(n: usize) -> impl Strategy<Value = MonomialMap> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 1..6).prop_map(move |ops| {
        let mut m: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        for (i, j, k, swap) in ops {
            if i == j {
                continue;
            }
            if swap {
                m.swap(i, j);
            } else {
                let rj = m[j].clone();
                for (x, y) in m[i].iter_mut().zip(rj) {
                    *x += k * y;
                }
            }
        }
        MonomialMap::new(m).expect("square")
    })
}

fn point_strategy(n: usize) -> impl Strategy<Value = TorusPoint<f64>> {
    prop::collection::vec((0.3f64..2.0, 0.0f64..std::f64::consts::TAU), n).prop_map(|v| {
        TorusPoint::new(
            v.into_iter().map(|(r, a)| C::from_polar(r, a)).collect(),
            0.0,
        )
        .expect("nonzero")
    })
}

fn max_diff(a: &[C<f64>], b: &[C<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn split_parts_sum_to_the_system(c in collection_strategy(2, 6, 4), mask in prop::collection::vec(any::<bool>(), 12), seed in any::<u64>()) {
        let f = random_system::<f64>(&c, seed);
        let b = c.map_supports_indexed(|i, a| {
            let mut k = i;
            a.filter(|_| {
                k += 1;
                mask[k % mask.len()]
            })
        });
        let (on, off) = f.split(&b).unwrap();
        let sum = on.add(&off).unwrap();
        prop_assert_eq!(sum.coefficients(), f.coefficients());
        prop_assert!(on.agrees_off(&SparseSystem::zeros(&c), &b).unwrap());
    }

    #[test]
    fn monomial_map_round_trips(m in unimodular_strategy(3), c in collection_strategy(3, 5, 3)) {
        prop_assert_eq!(m.determinant().abs(), 1);
        let inv = m.inverse().unwrap();
        prop_assert_eq!(m.compose(&inv), MonomialMap::identity(3));
        let image = m.apply_collection(&c);
        prop_assert_eq!(inv.apply_collection(&image), c.clone());
        prop_assert_eq!(mixed_volume(&image).unwrap(), mixed_volume(&c).unwrap());
    }

    #[test]
    fn pullback_composes_with_the_torus_map(m in unimodular_strategy(2), seed in any::<u64>(), x in point_strategy(2)) {
        let c = SupportCollection::repeated(&simplex_points(2, 2), 2);
        let f = random_system::<f64>(&c, seed);
        let g = f.pullback(&m).unwrap();
        let lhs = g.evaluate(&x.monomial_image(&m)).unwrap();
        let rhs = f.evaluate(&x).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-9 * (1.0 + rhs.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }

    #[test]
    fn pencil_is_affine_in_t(seed in any::<u64>(), t in 0.0f64..1.0, x in point_strategy(2)) {
        let c = SupportCollection::repeated(&rectangle_points(2, 1), 2);
        let f = random_system::<f64>(&c, seed);
        let g = random_system::<f64>(&c, seed.wrapping_add(1));
        let gamma = C::from_polar(1.0, 0.7);
        let fam = SegmentFamily::with_gamma(f.clone(), g.clone(), gamma).unwrap();
        let h = fam.at(t).evaluate(&x).unwrap();
        let fv = f.evaluate(&x).unwrap();
        let gv = g.evaluate(&x).unwrap();
        let expected: Vec<C<f64>> = fv.iter().zip(&gv).map(|(a, b)| a * t + b * gamma * (1.0 - t)).collect();
        prop_assert!(max_diff(&h, &expected) < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences(seed in any::<u64>(), x in point_strategy(2)) {
        let c = SupportCollection::new(2, vec![simplex_points(2, 3), rectangle_points(2, 2)]).unwrap();
        let f = random_system::<f64>(&c, seed);
        let jac = f.jacobian(&x).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let shift = |d: f64| {
                let mut v = x.coords().to_vec();
                v[j] += C::new(d, 0.0);
                TorusPoint::new(v, 0.0).unwrap()
            };
            let up = f.evaluate(&shift(h)).unwrap();
            let down = f.evaluate(&shift(-h)).unwrap();
            for i in 0..2 {
                let fd = (up[i] - down[i]) / (2.0 * h);
                prop_assert!((fd - jac[i][j]).norm() < 1e-5 * (1.0 + jac[i][j].norm()));
            }
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), c in collection_strategy(2, 5, 3)) {
        let f = random_system::<f64>(&c, seed);
        let back = SparseSystem::<f64>::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back, f);
        prop_assert_eq!(SupportCollection::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rectangle_mixed_volume_formula(k1 in 1i64..=4, l1 in 1i64..=4, k2 in 1i64..=4, l2 in 1i64..=4) {
        let c = SupportCollection::new(2, vec![rectangle_points(k1, l1), rectangle_points(k2, l2)]).unwrap();
        prop_assert_eq!(mixed_volume(&c).unwrap(), BigInt::from(k1 * l2 + k2 * l1));
    }

    #[test]
    fn mixed_volume_is_symmetric_and_translation_invariant(c in collection_strategy(3, 5, 3), shift in prop::collection::vec(-3i64..=3, 3)) {
        let mv = mixed_volume(&c).unwrap();
        let mut rev: Vec<Support> = c.iter().cloned().collect();
        rev.reverse();
        prop_assert_eq!(mixed_volume(&SupportCollection::new(3, rev).unwrap()).unwrap(), mv.clone());
        let v = LatticePoint::new(shift);
        let moved = c.map_supports(|a| a.translate(&v));
        prop_assert_eq!(mixed_volume(&moved).unwrap(), mv);
    }

    #[test]
    fn repeated_support_mixed_volume_is_normalized_volume(k in 1i64..=4) {
        // MV(kΔ_3, kΔ_3, kΔ_3) = k^3 and the lattice is the full one.
        let c = SupportCollection::repeated(&simplex_points(3, k), 3);
        prop_assert_eq!(mixed_volume(&c).unwrap(), BigInt::from(k * k * k));
        prop_assert!(!collection_lattice::<BigInt>(&c).is_proper());
    }

    #[test]
    fn positive_mixed_volume_iff_defects_nonnegative(c in collection_strategy(3, 3, 2)) {
        let positive = mixed_volume(&c).unwrap() > BigInt::from(0);
        prop_assert_eq!(has_positive_mixed_volume_by_defect(&c).unwrap(), positive);
    }
}
