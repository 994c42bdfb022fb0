use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rational::{q, qi, Q};

/// Max `|J|` over all subsets, checking every pattern against every map.
fn brute_max(n: usize, k: usize, maps: &[Vec<u8>], ok: impl Fn(usize, &[u8], u64) -> bool) -> usize {
    let mut best = 0;
    for jm in 0u64..(1 << n) {
        let j: Vec<usize> = (0..n).filter(|&z| jm >> z & 1 == 1).collect();
        if j.len() <= best {
            continue;
        }
        let total = k.pow(j.len() as u32);
        let all = (0..total).all(|code| {
            let sigma: Vec<u8> = (0..j.len()).map(|i| (code / k.pow(i as u32) % k) as u8 + 1).collect();
            maps.iter().enumerate().any(|(idx, psi)| {
                j.iter().zip(&sigma).all(|(&z, &s)| psi[z] == s) && ok(idx, &sigma, jm)
            })
        });
        if all {
            best = j.len();
        }
    }
    best
}

fn brute_half(adv: &SetAdversary) -> usize {
    let masks = adv.masks();
    brute_max(adv.n, adv.k, adv.maps(), |i, _, jm| masks[i] & jm == jm)
}

#[test]
fn half_full_sets() {
    let full = SetAdversary::full(4, 2).unwrap();
    assert_eq!(half_to_indep_search(&full, &qi(1)).unwrap().certificate.j.len(), 2);
    let two = SetAdversary::full(2, 2).unwrap();
    assert_eq!(half_to_indep_search(&two, &qi(1)).unwrap().certificate.j.len(), 1);
}

#[test]
fn half_matches_brute_force_on_random_adversaries() {
    for seed in 0..40u64 {
        for (n, k, tau) in [(4, 2, q(3, 4)), (6, 2, q(1, 2)), (6, 3, q(2, 3)), (5, 2, q(3, 5))] {
            let adv = SetAdversary::random(n, k, tau.clone(), seed).unwrap();
            let got = half_to_indep_search(&adv, &tau).unwrap();
            assert!(got.certificate.verified);
            assert!(got.certificate.exact);
            assert_eq!(got.certificate.j.len(), brute_half(&adv), "seed {seed}, n {n}, k {k}");
        }
    }
}

#[test]
fn half_rejects_small_sets() {
    let adv = equal_split_adversary(2, 4).unwrap();
    assert!(half_to_indep_search(&adv, &q(3, 4)).is_err());
    let ok = half_to_indep_search(&adv, &q(1, 2)).unwrap();
    assert!(!ok.tau_above_split);
}

#[test]
fn equal_split_stays_below_four() {
    for n in [4, 8] {
        let adv = equal_split_adversary(2, n).unwrap();
        let got = half_to_indep_search(&adv, &q(1, 2)).unwrap();
        assert!(got.certificate.j.len() < 4);
        assert_eq!(got.certificate.j.len(), brute_half(&adv));
        assert!(got.certificate.j.len() <= 3);
    }
}

#[test]
fn func_single_colour_constant() {
    let r_big = q(1, 2);
    let adv = FunctionAdversary::from_fn(5, 1, Exponent::Infinity, qi(1), r_big.clone(), |_| vec![r_big.clone(); 5]).unwrap();
    let grid = threshold_grid(1, &q(1, 4), &r_big, &qi(1), &Exponent::Infinity).unwrap();
    let cert = func_to_indep_search(&adv, &grid).unwrap();
    assert_eq!(cert.j, vec![0, 1, 2, 3, 4]);
    assert!(cert.verified);
}

#[test]
fn func_rejects_low_mean() {
    let res = FunctionAdversary::from_fn(4, 2, Exponent::Infinity, qi(1), q(1, 2), |psi| {
        psi.iter().map(|&c| if c == 1 { qi(1) } else { -qi(1) }).collect()
    });
    assert!(res.is_err());
}

#[test]
fn func_rejects_grid_mismatch() {
    let adv = FunctionAdversary::from_fn(4, 2, Exponent::Infinity, qi(1), q(1, 2), |_| vec![qi(1); 4]).unwrap();
    let grid = threshold_grid(2, &q(1, 4), &q(1, 2), &qi(2), &Exponent::Infinity).unwrap();
    assert!(func_to_indep_search(&adv, &grid).is_err());
}

/// Max `|J|` over the colour sets `A` the threshold grid can express, requiring `σ^{−1}(A) ⊆ Z_ψ`.
///
/// `A` is expressible when thresholds "everything passes" off `A` and "only `Z_ψ` passes"
/// on `A`, each the largest grid value of its class, have mean at least `r`.
fn brute_partial(adv: &SetAdversary, m: usize, tau: &Q) -> usize {
    let k = adv.k;
    let masks = adv.masks();
    let theta = partial_theta(k, m, tau).unwrap();
    let fadv = indicator_function_adversary(adv, tau, &theta).unwrap();
    let r = &fadv.big_r / qi(2);
    let grid = threshold_grid(k, &r, &fadv.big_r, &fadv.c, &Exponent::Infinity).unwrap();
    let high = Q::from_integer(1.into()) / tau - qi(1) + &theta;
    let largest_at_most = |v: &Q| (1..=2 * grid.m).filter(|&i| grid.value(i) <= *v).max().unwrap();
    (1u32..(1 << k))
        .filter(|a| {
            let idx: Vec<usize> =
                (0..k).map(|j| if a >> j & 1 == 1 { largest_at_most(&high) } else { largest_at_most(&-qi(1)) }).collect();
            grid.admits(&idx)
        })
        .map(|a| {
            brute_max(adv.n, k, adv.maps(), |i, sigma, jm| {
                let j: Vec<usize> = (0..adv.n).filter(|&z| jm >> z & 1 == 1).collect();
                j.iter().zip(sigma).all(|(&z, &s)| a >> (s - 1) & 1 == 0 || masks[i] >> z & 1 == 1)
            })
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn equal_split_through_function_search() {
    let adv = equal_split_adversary(2, 4).unwrap();
    let tau = q(1, 2);
    let theta = partial_theta(2, 1, &tau).unwrap();
    assert_eq!(theta, qi(1));
    let fadv = indicator_function_adversary(&adv, &tau, &theta).unwrap();
    let grid = threshold_grid(2, &(&fadv.big_r / qi(2)), &fadv.big_r, &fadv.c, &Exponent::Infinity).unwrap();
    let cert = func_to_indep_search(&fadv, &grid).unwrap();
    assert!(cert.verified);
    let partial = partial_indep_search(&adv, 1, &tau).unwrap();
    assert_eq!(partial.certificate, cert);
    assert_eq!(partial.j.len(), brute_partial(&adv, 1, &tau));
    assert!(!partial.a.is_empty());
    let t = cert.thresholds.unwrap();
    let a: Vec<usize> = (0..2).filter(|&j| t[j] > -qi(1)).map(|j| j + 1).collect();
    assert_eq!(a, partial.a);
}

#[test]
fn partial_full_adversary_reduces_to_half() {
    for (n, k) in [(4, 2), (6, 3), (6, 2)] {
        let adv = SetAdversary::full(n, k).unwrap();
        let partial = partial_indep_search(&adv, k, &qi(1)).unwrap();
        let half = half_to_indep_search(&adv, &qi(1)).unwrap();
        assert_eq!(partial.j, half.certificate.j);
    }
}

#[test]
fn partial_random_binary_adversaries() {
    for seed in 0..6u64 {
        let adv = SetAdversary::random(10, 2, q(3, 5), seed).unwrap();
        let got = partial_indep_search(&adv, 1, &q(3, 5)).unwrap();
        assert!(got.certificate.verified);
        assert!(!got.a.is_empty() && !got.j.is_empty());
    }
    for seed in 0..10u64 {
        let adv = SetAdversary::random(6, 2, q(3, 5), seed).unwrap();
        let got = partial_indep_search(&adv, 1, &q(3, 5)).unwrap();
        assert_eq!(got.j.len(), brute_partial(&adv, 1, &q(3, 5)), "seed {seed}");
    }
}

#[test]
fn partial_rejects_ranges() {
    let adv = SetAdversary::full(4, 2).unwrap();
    assert!(partial_indep_search(&adv, 0, &qi(1)).is_err());
    assert!(partial_indep_search(&adv, 3, &qi(1)).is_err());
    assert!(partial_indep_search(&adv, 2, &q(1, 2)).is_err());
}

#[test]
fn func_search_with_finite_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let table: Vec<Vec<Q>> = (0..20).map(|_| (0..4).map(|_| q(rng.gen_range(2..8), 8)).collect()).collect();
    let adv = FunctionAdversary::from_fn(4, 2, Exponent::Finite(qi(2)), qi(2), q(1, 4), |psi| {
        let idx = psi.iter().fold(0usize, |a, &c| a * 2 + c as usize - 1) % table.len();
        table[idx].clone()
    })
    .unwrap();
    let grid = threshold_grid(2, &q(1, 8), &q(1, 4), &qi(2), &Exponent::Finite(qi(2))).unwrap();
    let cert = func_to_indep_search(&adv, &grid).unwrap();
    assert!(cert.verified);
}

#[test]
fn pipeline_chain_and_lower_bound() {
    // drop the first point of each colour class: |Z_ψ| = 6 = (3/4)·8
    let adv = SetAdversary::from_fn(8, 2, Some(q(3, 4)), |psi| {
        let mut m = 0xffu64;
        for c in 1..=2u8 {
            let first = psi.iter().position(|&x| x == c).unwrap();
            m &= !(1 << first);
        }
        m
    })
    .unwrap();
    let rep = proof_pipeline_half(&adv, &q(3, 4), &q(1, 4), None).unwrap();
    assert!(rep.chain_holds);
    assert!(rep.lower_bound_tight);
    assert_eq!(rep.w_size, 2);
    // 70 maps, each with C(6,2) = 15 two-subsets
    assert_eq!(rep.xi, 1050u32.into());
    assert_eq!(rep.s_size, rep.xi_w_phi);
}

#[test]
fn pipeline_on_full_sets_brute_counts() {
    let adv = SetAdversary::full(4, 2).unwrap();
    let rep = proof_pipeline_half(&adv, &qi(1), &q(1, 2), None).unwrap();
    assert!(rep.chain_holds && rep.lower_bound_tight);
    // every pair W is contained in every Z_ψ = Z
    assert_eq!(rep.xi_w, 6);
    assert_eq!(rep.xi, 36u32.into());
    // ψ|_{Z∖W} = φ pins down ψ|_W up to balance: W = {0,1}, φ = (1,2) leaves (1,2) and (2,1)
    assert_eq!(rep.w, vec![0, 1]);
    assert_eq!(rep.phi, vec![1, 2]);
    assert_eq!(rep.s_size, 2);
    assert_eq!(rep.shattered.len(), 1);
}

#[test]
fn certificates_are_deterministic() {
    let a = SetAdversary::random(8, 2, q(3, 4), 99).unwrap();
    let b = SetAdversary::random(8, 2, q(3, 4), 99).unwrap();
    assert_eq!(a, b);
    let ca = serde_json::to_string(&half_to_indep_search(&a, &q(3, 4)).unwrap()).unwrap();
    let cb = serde_json::to_string(&half_to_indep_search(&b, &q(3, 4)).unwrap()).unwrap();
    assert_eq!(ca, cb);
}
