use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::*;

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn ints(xs: &[BigInt]) -> Vec<i64> {
    xs.iter().map(|x| x.to_i64().unwrap()).collect()
}

#[test]
fn depth_one_frozen() {
    let s = build_spec(1).unwrap();
    assert_eq!(ints(&s.n), vec![56]);
    assert_eq!(ints(&s.y[0]), vec![2, 3, 15, 23]);
    assert_eq!(ints(&s.y_prime[0]), vec![6, 7, 39, 47]);
    assert_eq!(ints(&s.z), vec![4]);
    assert_eq!(ints(&s.u), vec![24]);
    assert!(s.verified);
}

#[test]
fn periods_frozen_and_nested() {
    let s = build_spec(4).unwrap();
    assert_eq!(ints(&s.n), vec![56, 3528, 642096, 394246944]);
    assert_eq!(ints(&s.y[1][..4]), vec![6, 62, 63, 119]);
    assert_eq!(s.z[1], big(168));
    assert_eq!(s.u[1], big(1568));
    for p in 1..=4 {
        assert_eq!(s.y[p - 1].len() + s.y_prime[p - 1].len(), 1 << (p + 2));
    }
    let r = verify_spec(&s);
    assert!(r.all_pass, "{r:?}");
    assert_eq!(difference_check(&s), None);
}

#[test]
fn verify_catches_forbidden_window() {
    let mut s = build_spec(1).unwrap();
    s.y_prime[0][0] = big(0);
    let r = verify_spec(&s);
    assert!(!r.v_prime.pass);
    assert_eq!(r.v_prime.counterexample.as_deref(), Some("p=1: t=0"));
    assert!(!r.all_pass);
}

#[test]
fn verify_catches_colliding_blocks() {
    let mut s = build_spec(1).unwrap();
    // second block shifted onto the first: w = y_{1,3} coincides with v = y_{1,1} + 1
    s.y[0][2] = big(3);
    s.y[0][3] = big(4);
    s.u[0] = s.z[0].clone();
    s.y_prime[0][2] = big(7);
    s.y_prime[0][3] = big(8);
    let r = verify_spec(&s);
    assert!(!r.iii.pass);
    let c = r.iii.counterexample.unwrap();
    assert!(c.contains("v1=") && c.contains("w="), "{c}");
}

#[test]
fn structural_damage_is_reported() {
    let mut s = build_spec(2).unwrap();
    s.y[1].pop();
    let r = verify_spec(&s);
    assert!(!r.structure.pass && !r.all_pass);
    assert!(s.fast().is_err());
}

#[test]
fn depth_one_symbols() {
    let s = build_spec(1).unwrap();
    for (pos, want) in [(2, 1), (3, 2), (15, 3), (23, 4)] {
        let e = eval_x(&s, &big(pos)).unwrap();
        assert_eq!(e.value, want);
        assert_eq!(e.determined_at_level, Determination::Level(1));
        assert_eq!(e.period, Some(big(56)));
    }
    let zero = eval_x(&s, &big(0)).unwrap();
    assert_eq!((zero.value, zero.determined_at_level), (0, Determination::Level(1)));
    let open = eval_x(&s, &big(6)).unwrap();
    assert_eq!((open.value, open.determined_at_level), (0, Determination::Provisional));
    assert_eq!(serde_json::to_string(&open.determined_at_level).unwrap(), "\"PROVISIONAL\"");
}

#[test]
fn locate_examples() {
    let s = build_spec(1).unwrap();
    assert_eq!(locate(&s, &big(15)).unwrap(), Some((1, 3)));
    assert_eq!(locate(&s, &big(0)).unwrap(), None);
    assert_eq!(locate(&s, &big(2 + 7 * 56)).unwrap(), Some((1, 1)));
}

#[test]
fn locate_rejects_duplicate_residues() {
    let mut s = build_spec(1).unwrap();
    s.y[0][1] = s.y[0][0].clone();
    assert!(matches!(locate(&s, &big(2)), Err(crate::Error::Corrupt(_))));
}

#[test]
fn period_certificates() {
    let s1 = build_spec(1).unwrap();
    assert_eq!(period_certificate(&s1, &big(2)).unwrap(), Some(big(56)));
    assert_eq!(period_certificate(&s1, &big(0)).unwrap(), Some(big(56)));
    assert_eq!(period_certificate(&s1, &big(6)).unwrap(), None);
    let s3 = build_spec(3).unwrap();
    for pos in [-5000i64, -1, 0, 1, 17, 4242] {
        let e = eval_x(&s3, &big(pos)).unwrap();
        if let Some(n) = period_certificate(&s3, &big(pos)).unwrap() {
            for t in -100..=100 {
                assert_eq!(eval_x(&s3, &(big(pos) + &n * t)).unwrap().value, e.value);
            }
        }
    }
}

#[test]
fn fast_path_matches_exact_path() {
    let s = build_spec(3).unwrap();
    let f = s.fast().unwrap();
    for pos in -3000i64..3000 {
        let e = eval_x(&s, &big(pos)).unwrap();
        let g = f.eval(pos as i128);
        assert_eq!(e.value, g.value);
        assert_eq!(e.q, g.q);
        let level = match e.determined_at_level {
            Determination::Level(p) => Some(p),
            Determination::Provisional => None,
        };
        assert_eq!(level, g.level);
    }
}

#[test]
fn window_marks_provisional() {
    let s = build_spec(1).unwrap();
    let w = window(&s, &big(0), &big(8)).unwrap();
    assert_eq!(w, "001200??0");
}

#[test]
fn toeplitz_on_window() {
    let s = build_spec(3).unwrap();
    let r = toeplitz_window(&s, 2000).unwrap();
    assert!(r.all_periodic);
    assert_eq!(r.checked, 4001);
}

#[test]
fn pattern_witness_examples() {
    let s = build_spec(2).unwrap();
    assert_eq!(witness_for_pattern(&s, &[2]).unwrap(), big(55));
    assert_eq!(witness_for_pattern(&s, &[1]).unwrap(), big(0));
    assert!(witness_for_pattern(&s, &[1, 3]).is_err());
    assert!(witness_for_pattern(&s, &[1, 1, 1]).is_err());
}

#[test]
fn every_pattern_has_a_witness() {
    let s = build_spec(3).unwrap();
    for p in 1..=3usize {
        for code in 0..1u32 << p {
            let low: Vec<u8> = (0..p).map(|i| 1 + ((code >> i) & 1) as u8).collect();
            let high: Vec<u8> = low.iter().map(|c| c + 2).collect();
            for (sigma, anchors) in [(&low, &s.a), (&high, &s.b)] {
                let a = witness_for_pattern(&s, sigma).unwrap();
                for i in 0..p {
                    assert_eq!(eval_x(&s, &(&anchors[i] - &a)).unwrap().value, sigma[i]);
                }
            }
        }
    }
}

/// Patterns at difference `d` that some determined pair `(t, t + d)` carries, by scanning one full period.
fn realized_by_scan(f: &FastSpec, d: i128, c1: u8, c2: u8) -> bool {
    let period = f.n[f.depth - 1];
    (0..period).any(|t| {
        let (e1, e2) = (f.eval(t), f.eval(t + d));
        e1.level.is_some() && e2.level.is_some() && e1.value == c1 && e2.value == c2
    })
}

#[test]
fn blocked_differences_are_never_realized() {
    let s2 = build_spec(2).unwrap();
    let s3 = build_spec(3).unwrap();
    let f2 = s2.fast().unwrap();
    let f3 = s3.fast().unwrap();
    for (c1, c2) in [(1u8, 3u8), (3, 1), (2, 4), (1, 1), (3, 3)] {
        for d in (1..=400i128).chain([1000, 2071, 3527]) {
            let status = super::audit::pattern_status(&f2, c1, c2, d);
            let exact2 = realized_by_scan(&f2, d, c1, c2);
            assert_eq!(status == "exact", exact2, "d={d} pattern={c1}{c2}");
            if status == "blocked" && d <= 24 {
                assert!(!realized_by_scan(&f3, d, c1, c2), "d={d} pattern={c1}{c2} realized deeper");
            }
        }
    }
}

fn brute_pair(spec: &ToeplitzSpec, target: AuditTarget, srange: i64, arange: i64) -> bool {
    let f = spec.fast().unwrap();
    let pats: Vec<Vec<(u8, u8)>> = match target {
        AuditTarget::Pair(i, j) => [(i, i), (i, j), (j, i), (j, j)].iter().map(|&c| vec![c]).collect(),
        AuditTarget::Product => [(1, 1), (1, 2), (2, 1), (2, 2)].iter().map(|&(a, b)| vec![(a, b), (a + 2, b + 2)]).collect(),
    };
    let hit = |s1: i128, s2: i128, c: (u8, u8)| {
        (-arange..=arange).any(|a| {
            let (e1, e2) = (f.eval(s1 + a as i128), f.eval(s2 + a as i128));
            e1.level.is_some() && e2.level.is_some() && e1.value == c.0 && e2.value == c.1
        })
    };
    for s1 in -srange..=srange {
        for s2 in s1 + 1..=srange {
            if pats.iter().all(|p| p.iter().all(|&c| hit(s1 as i128, s2 as i128, c))) {
                return true;
            }
        }
    }
    false
}

#[test]
fn audit_agrees_with_brute_force_on_small_ranges() {
    let s = build_spec(2).unwrap();
    for target in [AuditTarget::Pair(1, 2), AuditTarget::Pair(3, 4), AuditTarget::Pair(1, 3), AuditTarget::Pair(2, 4), AuditTarget::Product] {
        let r = pair_independence_audit(&s, target, (&big(-12), &big(12)), (&big(-200), &big(200))).unwrap();
        assert_eq!(r.independent_pair.is_some(), brute_pair(&s, target, 12, 200), "{target}");
    }
}

#[test]
fn positive_control_finds_a_pair() {
    let s = build_spec(3).unwrap();
    let ((slo, shi), (alo, ahi)) = default_audit_ranges(&s).unwrap();
    let r = pair_independence_audit(&s, AuditTarget::Pair(1, 2), (&slo, &shi), (&alo, &ahi)).unwrap();
    let pair = r.independent_pair.expect("positive control");
    assert_eq!(r.max_independent_size, 2);
    let f = s.fast().unwrap();
    let (s1, s2): (i128, i128) = (pair.s1.parse().unwrap(), pair.s2.parse().unwrap());
    for sh in &pair.shifts {
        let a: i128 = sh.a.parse().unwrap();
        let want: Vec<u8> = sh.pattern.bytes().map(|b| b - b'0').collect();
        assert_eq!(vec![f.eval(s1 + a).value, f.eval(s2 + a).value], want);
    }
}

#[test]
fn mixed_pairs_are_not_independent() {
    let s = build_spec(3).unwrap();
    let ((slo, shi), (alo, ahi)) = default_audit_ranges(&s).unwrap();
    for target in [AuditTarget::Pair(1, 3), AuditTarget::Pair(2, 4), AuditTarget::Product] {
        let r = pair_independence_audit(&s, target, (&slo, &shi), (&alo, &ahi)).unwrap();
        assert!(r.independent_pair.is_none(), "{target}");
        assert_eq!(r.max_independent_size, 1);
        assert_eq!(r.blocked + r.inconclusive + r.fully_realizable, r.differences);
    }
}

#[test]
fn audit_input_checks() {
    let s = build_spec(2).unwrap();
    assert!(pair_independence_audit(&s, AuditTarget::Pair(1, 1), (&big(0), &big(3)), (&big(0), &big(3))).is_err());
    assert!(pair_independence_audit(&s, AuditTarget::Pair(1, 5), (&big(0), &big(3)), (&big(0), &big(3))).is_err());
    assert!(pair_independence_audit(&s, AuditTarget::Pair(1, 3), (&big(3), &big(0)), (&big(0), &big(3))).is_err());
    assert!(default_audit_ranges(&s).is_err());
}

#[test]
fn json_uses_decimal_strings() {
    let s = build_spec(1).unwrap();
    let v = serde_json::to_value(&s).unwrap();
    assert_eq!(v["n"][0], "56");
    assert_eq!(v["yPrime"][0][3], "47");
    let back: ToeplitzSpec = serde_json::from_value(v).unwrap();
    assert_eq!(back, s);
    assert_eq!(s.truncate(1).unwrap(), s);
    assert!(s.truncate(2).is_err());
}

