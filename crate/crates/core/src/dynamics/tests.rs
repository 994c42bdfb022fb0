use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rational::{q, qi, Q};

fn x2() -> SubshiftSpec {
    SubshiftSpec::two_component()
}

fn cons(items: &[(i64, &[(i64, u8)])]) -> Vec<(i64, CylinderSet)> {
    items.iter().map(|(s, c)| (*s, CylinderSet::new(c.iter().copied()))).collect()
}

#[test]
fn satisfiable_examples() {
    let x = x2();
    let none = satisfiable(&x, &cons(&[(0, &[(0, 0)]), (0, &[(5, 2)])])).unwrap();
    assert_eq!(none, SatOutcome::NoComponent { symbols: vec![0, 2] });
    let some = satisfiable(&x, &cons(&[(0, &[(0, 0)]), (0, &[(5, 1)])])).unwrap();
    let p = some.witness().unwrap();
    assert_eq!(p.default, 1);
    assert_eq!((p.at(0), p.at(5)), (0, 1));
    let empty = satisfiable(&x, &[]).unwrap();
    assert!(empty.witness().is_some());
    let clash = satisfiable(&x, &cons(&[(0, &[(3, 0)]), (2, &[(1, 1)])])).unwrap();
    assert_eq!(clash, SatOutcome::Clash { position: 3, first: 0, second: 1 });
    assert!(satisfiable(&x, &cons(&[(0, &[(0, 7)])])).is_err());
}

/// Every assignment of symbols to the constrained positions, per component.
fn brute_sat(x: &SubshiftSpec, c: &[(i64, CylinderSet)]) -> bool {
    let mut merged = std::collections::BTreeMap::new();
    for (s, cyl) in c {
        for (&p, &v) in &cyl.constraints {
            merged.entry(p + s).or_insert_with(Vec::new).push(v);
        }
    }
    let positions: Vec<_> = merged.into_iter().collect();
    x.components.iter().any(|comp| {
        let total = comp.len().pow(positions.len() as u32);
        (0..total).any(|mut code| {
            positions.iter().all(|(_, req)| {
                let v = comp[code % comp.len()];
                code /= comp.len();
                req.iter().all(|&r| r == v)
            })
        })
    })
}

#[test]
fn satisfiable_matches_brute_force() {
    let x = SubshiftSpec::new(vec![0, 1, 2, 3], vec![vec![0, 1], vec![1, 2], vec![2, 3, 0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let m = rng.gen_range(0..4);
        let c: Vec<(i64, CylinderSet)> = (0..m)
            .map(|_| {
                let len = rng.gen_range(1..3);
                (rng.gen_range(-2..3), CylinderSet::new((0..len).map(|_| (rng.gen_range(0..3), rng.gen_range(0..4)))))
            })
            .collect();
        let got = satisfiable(&x, &c).unwrap();
        assert_eq!(got.witness().is_some(), brute_sat(&x, &c), "{c:?}");
        if let Some(p) = got.witness() {
            assert!(x.contains(p));
            assert!(c.iter().all(|(s, cyl)| cyl.contains(&p.shift(*s))));
        }
    }
}

#[test]
fn density_examples() {
    let x = x2();
    let same = [CylinderSet::at_origin(0), CylinderSet::at_origin(1)];
    let d = interval_independence_density(&x, &same, 8, DENSITY_BUDGET).unwrap();
    assert_eq!((d.phi, d.density.clone(), d.exact), (8, qi(1), true));
    let split = [CylinderSet::at_origin(0), CylinderSet::at_origin(2)];
    let d = interval_independence_density(&x, &split, 8, DENSITY_BUDGET).unwrap();
    assert_eq!(d.phi, 1);
    let d = interval_independence_density(&x, &split, 1, DENSITY_BUDGET).unwrap();
    assert!(d.phi <= 1);
    assert!(interval_independence_density(&x, &split, 0, DENSITY_BUDGET).is_err());
}

fn brute_phi(x: &SubshiftSpec, tuple: &[CylinderSet], n: usize) -> usize {
    let k = tuple.len();
    (0u32..1 << n)
        .filter(|&m| {
            let j: Vec<i64> = (0..n as i64).filter(|&i| m >> i & 1 == 1).collect();
            (0..k.pow(j.len() as u32)).all(|mut code| {
                let c: Vec<(i64, CylinderSet)> = j
                    .iter()
                    .map(|&s| {
                        let col = code % k;
                        code /= k;
                        (s, tuple[col].clone())
                    })
                    .collect();
                brute_sat(x, &c)
            })
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

#[test]
fn density_matches_brute_force_with_overlapping_cylinders() {
    let x = x2();
    let tuples = [
        vec![CylinderSet::new([(0, 0), (1, 1)]), CylinderSet::new([(0, 1)])],
        vec![CylinderSet::new([(0, 1), (2, 0)]), CylinderSet::new([(0, 1), (1, 2)])],
        vec![CylinderSet::at_origin(1), CylinderSet::at_origin(2), CylinderSet::new([(1, 1)])],
    ];
    for t in &tuples {
        for n in 1..=6 {
            let d = interval_independence_density(&x, t, n, DENSITY_BUDGET).unwrap();
            assert_eq!(d.phi, brute_phi(&x, t, n), "{t:?} n={n}");
        }
    }
}

#[test]
fn density_is_monotone() {
    let x = x2();
    let t = [CylinderSet::new([(0, 0), (1, 1)]), CylinderSet::new([(0, 1)])];
    let mut last = 0;
    for n in 1..=12 {
        let d = interval_independence_density(&x, &t, n, DENSITY_BUDGET).unwrap();
        assert!(d.phi >= last);
        last = d.phi;
    }
}

#[test]
fn measure_basics() {
    let px = PatternPoint::new([(0, 0)], 1);
    let py = PatternPoint::constant(1);
    let c = CylinderSet::at_origin(0);
    assert_eq!(measure_of(&FiniteMeasure::dirac(px.clone()), &c), qi(1));
    let half = FiniteMeasure::new([(px.clone(), q(1, 2)), (py.clone(), q(1, 2))]).unwrap();
    assert_eq!(measure_of(&half, &c), q(1, 2));
    for s in -3..=3 {
        let lhs = measure_of(&translate(&half, s), &c);
        assert_eq!(lhs, measure_of(&half, &c.pullback(s)));
    }
    assert!(FiniteMeasure::new([(px.clone(), q(1, 2))]).is_err());
    assert!(FiniteMeasure::new([(px, q(3, 2)), (py, q(-1, 2))]).is_err());
}

#[test]
fn layer_cake_examples() {
    let a = PatternPoint::constant(0);
    let b = PatternPoint::constant(1);
    let f1 = StepFunction::new([(CylinderSet::at_origin(0), qi(1))], q(1, 2));
    let f2 = StepFunction::new([(CylinderSet::at_origin(1), qi(1))], q(-1, 2));
    let split = layer_cake_split(&FiniteMeasure::dirac(a.clone()), &FiniteMeasure::dirac(b.clone()), &f1, &f2).unwrap();
    assert_eq!(split.mass_sum, qi(2));
    assert!(split.min_sum > Q::zero());

    // first and third functions of the three-function instance
    let pts = sum3_points();
    let half = q(1, 2);
    let mu = |j: usize| FiniteMeasure::new([(pts[j].0.clone(), half.clone()), (pts[j].1.clone(), half.clone())]).unwrap();
    let at = |j: usize, v: u8| CylinderSet::new([(j as i64, v)]);
    let g1 = StepFunction::new([(at(0, 0), q(3, 2)), (at(0, 1), q(-3, 2))], qi(0));
    let g3 = StepFunction::new([(at(2, 0), q(3, 2)), (at(2, 1), q(-7, 5))], qi(0));
    let split = layer_cake_split(&mu(0), &mu(2), &g1, &g3).unwrap();
    assert!(split.mass_sum > Q::one() && split.min_sum > Q::zero());

    let g2 = StepFunction::new([(at(1, 0), q(3, 2)), (at(1, 1), q(-3, 2))], qi(0));
    assert!(matches!(layer_cake_split(&mu(0), &mu(1), &g1, &g2), Err(crate::Error::Precondition(_))));
}

/// Best mass sum over a fine grid of thresholds.
fn brute_split_exists(mu1: &FiniteMeasure, mu2: &FiniteMeasure, f1: &StepFunction, f2: &StepFunction) -> bool {
    (-400..=400).any(|i| {
        let t = q(i, 64);
        let m1: Q = mu1.atoms().iter().filter(|a| f1.eval(&a.point) > t).map(|a| a.weight.clone()).sum();
        let m2: Q = mu2.atoms().iter().filter(|a| f2.eval(&a.point) > -t.clone()).map(|a| a.weight.clone()).sum();
        m1 + m2 > Q::one()
    })
}

#[test]
fn layer_cake_random_instances() {
    for seed in 0..200 {
        let (mu1, mu2, f1, f2) = random_layer_cake_instance(seed);
        let s = layer_cake_split(&mu1, &mu2, &f1, &f2).unwrap();
        assert!(s.mass_sum > Q::one() && s.min_sum > Q::zero() && s.epsilon > Q::zero());
        assert!(brute_split_exists(&mu1, &mu2, &f1, &f2));
    }
}

#[test]
fn sum3_examples() {
    let pts = sum3_points();
    let vals = [q(3, 2), q(3, 2), q(3, 2), q(-7, 5)];
    let out = sum3_audit(&pts, &vals).unwrap();
    assert!(out.no_triple);
    assert!(out.sum_mu_f > Q::zero());
    let bad = [q(3, 2), q(3, 2), q(3, 2), q(-8, 5)];
    assert!(sum3_audit(&pts, &bad).is_err());
    for seed in 0..200 {
        let v = random_sum3_values(seed);
        assert!(sum3_audit(&pts, &v).unwrap().no_triple);
    }
}

#[test]
fn sum3_detects_triples_outside_the_ranges() {
    // the search itself is not vacuous: with f_3(y_3) relaxed the (y,y,x-or-y) choice can win
    let pts = sum3_points();
    let rigged = [q(3, 2), q(3, 2), q(3, 2), q(-3, 2)];
    assert!(sum3_audit(&pts, &rigged).is_err());
}

#[test]
fn large_density_examples() {
    let a = [CylinderSet::at_origin(0), CylinderSet::at_origin(1)];
    let psi = [(0, 1), (1, 2), (2, 1), (3, 2)];
    let x = PatternPoint::new([(0, 0), (2, 0)], 1);
    let nu = FiniteMeasure::dirac(x.clone());
    let levels = [q(3, 4), q(3, 4)];
    let out = large_density_extract(&nu, &psi, [&a[0], &a[1]], [&levels[0], &levels[1]], &q(1, 4)).unwrap();
    assert_eq!(out.f_psi, vec![0, 1, 2, 3]);
    assert_eq!(out.value, qi(2));

    let y = PatternPoint::new([(0, 0)], 1);
    let nu2 = FiniteMeasure::new([(x.clone(), q(7, 8)), (y, q(1, 8))]).unwrap();
    let out = large_density_extract(&nu2, &psi, [&a[0], &a[1]], [&levels[0], &levels[1]], &q(1, 4)).unwrap();
    assert_eq!(out.point, x);

    let low = FiniteMeasure::dirac(PatternPoint::constant(1));
    assert!(matches!(
        large_density_extract(&low, &psi, [&a[0], &a[1]], [&levels[0], &levels[1]], &q(1, 4)),
        Err(crate::Error::Precondition(_))
    ));
}

#[test]
fn large_density_matches_atom_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = [CylinderSet::at_origin(0), CylinderSet::at_origin(1)];
    let psi: Vec<(i64, u8)> = (0..6).map(|s| (s, if s % 2 == 0 { 1 } else { 2 })).collect();
    let mut done = 0;
    for _ in 0..2000 {
        let atoms: Vec<(PatternPoint, Q)> = (0..3)
            .map(|_| {
                let core: Vec<(i64, u8)> =
                    (0..6).map(|p| (p, ((p % 2 == 1) != rng.gen_bool(0.2)) as u8)).collect();
                (PatternPoint::new(core, 1), q(1, 3))
            })
            .collect();
        let nu = FiniteMeasure::new(atoms).unwrap();
        let levels = [q(1, 2), q(1, 2)];
        let Ok(out) = large_density_extract(&nu, &psi, [&a[0], &a[1]], [&levels[0], &levels[1]], &q(0, 1)) else { continue };
        let best = nu
            .atoms()
            .iter()
            .map(|at| {
                psi.iter()
                    .filter(|&&(s, c)| a[c as usize - 1].pullback(s).contains(&at.point))
                    .map(|_| q(1, 3))
                    .sum::<Q>()
            })
            .max()
            .unwrap();
        assert_eq!(out.value, best);
        done += 1;
    }
    assert!(done > 10, "only {done} instances met the preconditions");
}

#[test]
fn convex_combination() {
    let f = [0i64, 1];
    let pats = vec![vec![1u8, 1], vec![1, 2], vec![2, 1], vec![2, 2]];
    let nb = |bound: Q| vec![WeakStarNbhd::new([(CylinderSet::at_origin(0), bound.clone())]), WeakStarNbhd::new([(CylinderSet::at_origin(1), bound)])];
    let point = |sigma: &[u8]| PatternPoint::new(sigma.iter().enumerate().map(|(i, &c)| (i as i64, c - 1)), 0);
    let mu: Vec<FiniteMeasure> = pats.iter().map(|s| FiniteMeasure::dirac(point(s))).collect();
    let other = |s: &[u8]| PatternPoint::new(s.iter().enumerate().map(|(i, &c)| (i as i64, c - 1)), 1);
    let nu: Vec<FiniteMeasure> = pats.iter().map(|s| FiniteMeasure::dirac(other(s))).collect();
    let (mn, nn) = (nb(q(1, 2)), nb(q(1, 2)));
    let same = convex_witness_combine(&f, &pats, (&mu, &mn), (&nu, &nn), &qi(1)).unwrap();
    assert_eq!(same.witnesses, mu);
    let mixed = convex_witness_combine(&f, &pats, (&mu, &mn), (&nu, &nn), &q(1, 2)).unwrap();
    assert!(mixed.witnesses.iter().all(|w| w.support_size() == 2 && w.atoms().iter().all(|a| a.weight == q(1, 2))));
    assert_eq!(mixed.max_support, 2);
    let broken = nb(qi(1));
    assert!(convex_witness_combine(&f, &pats, (&mu, &broken), (&nu, &nn), &q(1, 2)).is_err());
}

#[test]
fn convex_combination_random_reverification() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = [0i64, 2];
    let pats: Vec<Vec<u8>> = vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]];
    let cyl = [CylinderSet::at_origin(0), CylinderSet::at_origin(1)];
    for _ in 0..200 {
        let witness = |rng: &mut ChaCha8Rng, s: &[u8]| {
            let base: Vec<(i64, u8)> = f.iter().zip(s).map(|(&p, &c)| (p, c - 1)).collect();
            let junk = PatternPoint::new([(1, rng.gen_range(0..2))], rng.gen_range(0..2));
            let w = q(rng.gen_range(6..10), 10);
            FiniteMeasure::new([(PatternPoint::new(base, 0), w.clone()), (junk, Q::one() - w)]).unwrap()
        };
        let mu: Vec<_> = pats.iter().map(|s| witness(&mut rng, s)).collect();
        let nu: Vec<_> = pats.iter().map(|s| witness(&mut rng, s)).collect();
        let nb = |b: Q| cyl.iter().map(|c| WeakStarNbhd::new([(c.clone(), b.clone())])).collect::<Vec<_>>();
        let lambda = q(rng.gen_range(0..=8), 8);
        let out = convex_witness_combine(&f, &pats, (&mu, &nb(q(1, 2))), (&nu, &nb(q(1, 2))), &lambda).unwrap();
        assert!(out.max_support <= 4);
    }
}

#[test]
fn not_ie_finite_manifestation() {
    let inst = not_ie_instance(&q(3, 4), &q(1, 8)).unwrap();
    for n in [1usize, 2, 5, 16, 32] {
        let w = interval_independence_density(&inst.subshift, &inst.w, n, DENSITY_BUDGET).unwrap();
        assert_eq!((w.phi, w.exact), (1, true), "n={n}");
        let v = interval_independence_density(&inst.subshift, &inst.v, n, DENSITY_BUDGET).unwrap();
        assert_eq!((v.phi, v.exact), (n, true), "n={n}");
    }
    assert!(not_ie_instance(&q(1, 2), &q(1, 8)).is_err());
    assert!(not_ie_instance(&q(3, 4), &q(1, 4)).is_err());
}

#[test]
fn measure_audit_and_reduction() {
    let inst = not_ie_instance(&q(3, 4), &q(1, 8)).unwrap();
    let gen = TwoAtomGenerator::for_instance(&inst);
    let rep = measure_indep_audit(8, &inst.u, &gen, DENSITY_BUDGET).unwrap();
    assert_eq!(rep.size, 1);
    assert!(rep.exact);
    let red = point_reduction(&inst.subshift, &rep.independent, &rep.witnesses, &inst.u, &inst.w).unwrap();
    assert!(red.certificate);

    // hand-built pair of witnesses on F = {0}: the light atom is y_σ
    let f = [0i64];
    let hand: Vec<PatternWitness> = [1u8, 2]
        .iter()
        .map(|&c| {
            let z = inst.x[c as usize - 1].clone();
            let w = inst.y[c as usize - 1].clone();
            PatternWitness { sigma: vec![c], measure: FiniteMeasure::new([(z, q(3, 4)), (w, q(1, 4))]).unwrap() }
        })
        .collect();
    let red = point_reduction(&inst.subshift, &f, &hand, &inst.u, &inst.w).unwrap();
    assert_eq!(red.points, vec![inst.y[0].clone(), inst.y[1].clone()]);
    assert!(red.certificate);

    let dirac = vec![PatternWitness { sigma: vec![1], measure: FiniteMeasure::dirac(inst.x[0].clone()) }];
    assert!(point_reduction(&inst.subshift, &f, &dirac, &inst.u, &inst.w).is_err());
}

#[test]
fn measure_audit_positive_control() {
    // neighbourhoods built inside {1,2}^ℤ: both atoms can follow any pattern
    let x = x2();
    let heavy = vec![CylinderSet::at_origin(2), CylinderSet::at_origin(1)];
    let light = vec![CylinderSet::at_origin(1), CylinderSet::at_origin(2)];
    let nb: Vec<WeakStarNbhd> = (0..2).map(|j| WeakStarNbhd::new([(heavy[j].clone(), q(5, 8)), (light[j].clone(), q(1, 8))])).collect();
    let gen = TwoAtomGenerator { subshift: x.clone(), weight: q(3, 4), heavy, light: light.clone() };
    let rep = measure_indep_audit(6, &nb, &gen, DENSITY_BUDGET).unwrap();
    assert_eq!(rep.size, 6);
    let red = point_reduction(&x, &rep.independent, &rep.witnesses, &nb, &light).unwrap();
    assert!(red.certificate);
    assert_eq!(red.points.len(), 64);
}

#[test]
fn json_forms() {
    let nu = FiniteMeasure::new([(PatternPoint::constant(1), q(1, 3)), (PatternPoint::new([(2, 0)], 1), q(2, 3))]).unwrap();
    let v = serde_json::to_value(&nu).unwrap();
    assert_eq!(v["atoms"][0]["weight"], "1/3");
    let back: FiniteMeasure = serde_json::from_value(v).unwrap();
    assert_eq!(back, nu);
}
