use indeplab::banach::{hull_member, l1_distance, sign_embedding, simplex_net, HullMembership, VectorFamily};
use indeplab::dynamics::{layer_cake_split, random_layer_cake_instance};
use indeplab::extraction::{half_to_indep_search, Exponent, SetAdversary};
use indeplab::indep_core::{
    deviant_count_convolution, deviant_count_enumeration, enumerate_equidistributed, equidistributed_count,
    is_independent, is_shattered, largest_shattered, max_independent_subset, IndexedTupleFamily, MapFamily,
    SubsetMask,
};
use indeplab::rational::{abs_q, binomial, q, qi, Q};
use indeplab::toeplitz::build_spec;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn tuple_family() -> impl Strategy<Value = (usize, Vec<Vec<Vec<usize>>>)> {
    (3usize..7, 2usize..6).prop_flat_map(|(universe, index)| {
        let set = proptest::collection::vec(0..universe, 0..=universe);
        let tuple = proptest::collection::vec(set, 2);
        (Just(universe), proptest::collection::vec(tuple, index))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn independent_sets_reverify_and_are_hereditary((universe, tuples) in tuple_family(), drop in any::<u64>()) {
        let fam = IndexedTupleFamily::from_indices(universe, 2, &tuples).unwrap();
        let all = SubsetMask::full(tuples.len());
        let best = max_independent_subset(&fam, &all, 1 << 20).unwrap();
        prop_assert!(best.exact);
        prop_assert!(is_independent(&fam, &best.set).unwrap().independent);
        let kept: Vec<usize> = best.set.indices().into_iter().filter(|i| drop >> i & 1 == 0).collect();
        let sub = SubsetMask::from_indices(tuples.len(), &kept).unwrap();
        prop_assert!(is_independent(&fam, &sub).unwrap().independent);
    }

    #[test]
    fn sauer_bound_for_binary_families(n in 1usize..=5, pick in proptest::collection::vec(any::<bool>(), 32)) {
        let maps: Vec<Vec<u8>> = (0..1u32 << n)
            .filter(|&c| pick[c as usize])
            .map(|c| (0..n).map(|i| (c >> i & 1) as u8 + 1).collect())
            .collect();
        prop_assume!(!maps.is_empty());
        let size = maps.len() as u64;
        let fam = MapFamily::new(n, 2, false, maps).unwrap();
        let best = largest_shattered(&fam).unwrap();
        prop_assert!(is_shattered(&fam, &best.indices()));
        let mut d = 0;
        let mut below = BigUint::zero();
        while d <= n {
            below += binomial(n as u64, d as u64);
            if BigUint::from(size) > below {
                d += 1;
            } else {
                break;
            }
        }
        prop_assert!(best.len() >= d);
    }

    #[test]
    fn equidistributed_count_matches_enumeration(n in 1usize..=9, k in 1usize..=4) {
        let listed = enumerate_equidistributed(n, k).count();
        prop_assert_eq!(equidistributed_count(n, k), BigUint::from(listed));
    }

    #[test]
    fn deviant_census_methods_agree(
        k in 2usize..=3,
        blocks in proptest::collection::vec(1usize..=3, 1..=3),
        eps in 1i64..=4,
        eta in 1i64..=4,
    ) {
        let n: usize = blocks.iter().sum();
        let epsilon = q(eps, 4 * k as i64);
        let eta = q(eta, 8);
        prop_assert_eq!(
            deviant_count_convolution(n, k, &blocks, &epsilon, &eta).unwrap(),
            deviant_count_enumeration(n, k, &blocks, &epsilon, &eta).unwrap()
        );
    }

    #[test]
    fn half_extraction_reverifies_and_is_deterministic(n in 2usize..=6, seed in any::<u64>()) {
        let tau = q(1, 2);
        let adv = SetAdversary::random(n, 2, tau.clone(), seed).unwrap();
        let a = half_to_indep_search(&adv, &tau).unwrap();
        let b = half_to_indep_search(&SetAdversary::random(n, 2, tau.clone(), seed).unwrap(), &tau).unwrap();
        prop_assert!(a.certificate.verified);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn layer_cake_split_meets_both_inequalities(seed in any::<u64>()) {
        let (mu1, mu2, f1, f2) = random_layer_cake_instance(seed);
        let split = layer_cake_split(&mu1, &mu2, &f1, &f2).unwrap();
        prop_assert!(split.mass_sum > Q::one());
        prop_assert!(split.min_sum > Q::zero());
        prop_assert!(split.epsilon > Q::zero());
        prop_assert_eq!(&split.threshold1 + &split.threshold2, qi(2) * &split.epsilon);
    }

    #[test]
    fn sign_embedding_is_isometric(xs in proptest::collection::vec((-40i64..=40, 1i64..=9), 1..=6)) {
        let x: Vec<Q> = xs.iter().map(|&(a, b)| q(a, b)).collect();
        let phi = sign_embedding(x.len()).unwrap();
        let sup = phi.apply(&x).iter().map(abs_q).max().unwrap();
        prop_assert_eq!(sup, x.iter().fold(Q::zero(), |a, v| a + abs_q(v)));
    }

    #[test]
    fn hull_answers_are_certified(
        pts in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 3), 1..=6),
        target in proptest::collection::vec(-4i64..=4, 3),
    ) {
        let e: Vec<Vec<Q>> = pts.iter().map(|v| v.iter().map(|&a| q(a, 2)).collect()).collect();
        let t: Vec<Q> = target.iter().map(|&a| q(a, 4)).collect();
        let fam = VectorFamily::new(3, e.clone(), Exponent::Infinity).unwrap();
        match hull_member(&fam, &t).unwrap() {
            HullMembership::Feasible { coefficients } => {
                prop_assert!(coefficients.iter().fold(Q::zero(), |a, b| a + b) <= Q::one());
                for i in 0..3 {
                    let c = e.iter().zip(&coefficients).fold(Q::zero(), |a, (v, s)| a + &v[i] * s);
                    prop_assert_eq!(&c, &t[i]);
                }
            }
            HullMembership::Infeasible { certificate } => {
                // y_0 ≥ 0 on the mass row, y·(1, v) ≥ 0 for every v, y·(1, target) < 0
                prop_assert!(certificate[0] >= Q::zero());
                for v in &e {
                    let s = v.iter().zip(&certificate[1..]).fold(certificate[0].clone(), |a, (x, y)| a + x * y);
                    prop_assert!(s >= Q::zero());
                }
                let s = t.iter().zip(&certificate[1..]).fold(certificate[0].clone(), |a, (x, y)| a + x * y);
                prop_assert!(s < Q::zero());
            }
        }
    }

    #[test]
    fn simplex_net_has_required_mesh(m in 1usize..=4, c in 1i64..=3, raw in proptest::collection::vec(0i64..500, 4)) {
        let net = simplex_net(m, &qi(c)).unwrap();
        let total: i64 = raw[..m].iter().sum();
        prop_assume!(total > 0);
        let lambda: Vec<Q> = raw[..m].iter().map(|&x| q(x, total)).collect();
        let near = net.nearest(&lambda).unwrap();
        prop_assert!(net.lambda.contains(&near));
        prop_assert!(l1_distance(&near, &lambda) < Q::one() / qi(4 * c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn toeplitz_symbols_repeat_with_the_period(s in -2_000_000i128..2_000_000, shift in -3i128..=3) {
        let spec = build_spec(3).unwrap();
        let fast = spec.fast().unwrap();
        let period = fast.n[2];
        let here = fast.eval(s);
        let there = fast.eval(s + shift * period);
        if here.level.is_some() {
            prop_assert_eq!(here, there);
        }
    }
}
