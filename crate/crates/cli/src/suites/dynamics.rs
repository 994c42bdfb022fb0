use indeplab::dynamics::{
    interval_independence_density, layer_cake_split, measure_indep_audit, not_ie_instance, point_reduction,
    random_layer_cake_instance, random_sum3_values, sum3_audit, sum3_points, FiniteMeasure, PatternWitness,
    StepFunction, TwoAtomGenerator, DENSITY_BUDGET,
};
use indeplab::par;
use indeplab::rational::{fmt_q, Q};
use num_traits::{One, Zero};
use serde_json::json;

use super::{first_failure, rational, trial_seeds, SuiteError, SuiteOutput, SuiteResult};
use crate::cert::{Certificate, Table};
use crate::config::SuiteConfig;

pub fn not_ie(cfg: &SuiteConfig) -> SuiteResult {
    let max_n = cfg.params.n.unwrap_or(32);
    if max_n == 0 || max_n > 64 {
        return Err(SuiteError::Config("window length must lie in 1..=64".into()));
    }
    let lambda = rational(&cfg.params.tau, "3/4")?;
    let epsilon = rational(&cfg.params.delta, "1/8")?;
    let inst = not_ie_instance(&lambda, &epsilon)?;
    let mut failures = Vec::new();
    let mut table = Table::new(&["n", "phiSplit", "phiControl", "exact"]);
    let ns: Vec<usize> = (1..=max_n).collect();
    let results = par::map(&ns, |&n| {
        let w = interval_independence_density(&inst.subshift, &inst.w, n, DENSITY_BUDGET)?;
        let v = interval_independence_density(&inst.subshift, &inst.v, n, DENSITY_BUDGET)?;
        Ok::<_, indeplab::Error>((w, v))
    });
    let mut rows = Vec::new();
    for (n, r) in ns.iter().zip(results) {
        let (w, v) = r?;
        if w.phi != 1 || !w.exact {
            failures.push(format!("n={n}: split pair has φ={}", w.phi));
        }
        if v.phi != *n || !v.exact {
            failures.push(format!("n={n}: control pair has φ={}", v.phi));
        }
        table.push(vec![n.to_string(), w.phi.to_string(), v.phi.to_string(), (w.exact && v.exact).to_string()]);
        rows.push(json!({"n": n, "phiSplit": w.phi, "phiControl": v.phi}));
    }

    let audit_n = max_n.min(8);
    let gen = TwoAtomGenerator::for_instance(&inst);
    let audit = measure_indep_audit(audit_n, &inst.u, &gen, DENSITY_BUDGET)?;
    if audit.size != 1 || !audit.exact {
        failures.push(format!("measure audit on [0,{audit_n}) found size {}", audit.size));
    }
    let reduced = point_reduction(&inst.subshift, &audit.independent, &audit.witnesses, &inst.u, &inst.w)?;
    if !reduced.certificate {
        failures.push("measure witnesses do not reduce to points".into());
    }
    let f = [0i64];
    let hand: Vec<PatternWitness> = [1u8, 2]
        .iter()
        .map(|&c| {
            let heavy = inst.x[c as usize - 1].clone();
            let light = inst.y[c as usize - 1].clone();
            let measure = FiniteMeasure::new([(heavy, lambda.clone()), (light, Q::one() - &lambda)])?;
            Ok(PatternWitness { sigma: vec![c], measure })
        })
        .collect::<Result<_, indeplab::Error>>()?;
    let hand_reduced = point_reduction(&inst.subshift, &f, &hand, &inst.u, &inst.w)?;
    if hand_reduced.points != inst.y.to_vec() || !hand_reduced.certificate {
        failures.push("hand-built witnesses do not reduce to the light points".into());
    }
    let params = json!({"maxN": max_n, "lambda": fmt_q(&lambda), "epsilon": fmt_q(&epsilon), "auditN": audit_n});
    let witness = json!({"densities": rows, "measureAudit": audit, "reduction": reduced, "handReduction": hand_reduced});
    let cert = Certificate::new("not-ie-manifestation", params, witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}

/// `μ(f > t)` over the atoms.
fn superlevel(mu: &FiniteMeasure, f: &StepFunction, t: &Q) -> Q {
    mu.atoms().iter().filter(|a| &f.eval(&a.point) > t).fold(Q::zero(), |s, a| s + &a.weight)
}

pub fn sum(cfg: &SuiteConfig) -> SuiteResult {
    let trials = cfg.params.trials.unwrap_or(200);
    let seeds = trial_seeds(cfg.seed, trials);
    let mut failures = Vec::new();
    let results = par::map(&seeds, |&s| {
        let (mu1, mu2, f1, f2) = random_layer_cake_instance(s);
        let split = layer_cake_split(&mu1, &mu2, &f1, &f2)?;
        let mass = superlevel(&mu1, &f1, &split.threshold1) + superlevel(&mu2, &f2, &split.threshold2);
        let split_ok = mass > Q::one() && split.min_sum > Q::zero() && split.epsilon > Q::zero()
            && split.threshold1 == &split.t + &split.epsilon
            && split.threshold2 == -&split.t + &split.epsilon;
        let sum3 = sum3_audit(&sum3_points(), &random_sum3_values(s))?;
        Ok::<_, indeplab::Error>((split_ok, sum3.no_triple, split, sum3.sum_mu_f))
    });
    let mut table = Table::new(&["seed", "t", "epsilon", "massSum", "splitOk", "sum3MuF", "noTriple"]);
    let (mut splits, mut clean) = (0usize, 0usize);
    for (s, r) in seeds.iter().zip(results) {
        let (ok, no_triple, split, mu_f) = r?;
        splits += ok as usize;
        clean += no_triple as usize;
        if !ok {
            failures.push(format!("seed {s}: layer-cake split fails its inequalities"));
        }
        if !no_triple {
            failures.push(format!("seed {s}: three-set audit found a triple"));
        }
        table.push(vec![
            s.to_string(),
            fmt_q(&split.t),
            fmt_q(&split.epsilon),
            fmt_q(&split.mass_sum),
            ok.to_string(),
            fmt_q(&mu_f),
            no_triple.to_string(),
        ]);
    }
    let params = json!({"trials": trials});
    let witness = json!({"splitsVerified": splits, "noTriple": clean});
    let cert = Certificate::new("layer-cake-sum3", params, witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}
