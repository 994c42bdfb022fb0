use indeplab::banach::{flm_bound_audit, random_net_family, sign_embedding, simplex_net, simplex_net_intersection};
use indeplab::par;
use indeplab::rational::{abs_q, fmt_q, q, qi, Q};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{first_failure, rational, trial_seeds, SuiteError, SuiteOutput, SuiteResult};
use crate::cert::{Certificate, Table};
use crate::config::SuiteConfig;

const ISOMETRY_SAMPLES: usize = 100;
const NORM_SAMPLES: usize = 50;

pub fn chain(cfg: &SuiteConfig) -> SuiteResult {
    let trials = cfg.params.trials.unwrap_or(200);
    let delta = rational(&cfg.params.delta, "100/101")?;
    if delta <= Q::zero() || delta > qi(1) {
        return Err(SuiteError::Config("δ must lie in (0, 1]".into()));
    }
    let c = qi(1) / &delta;
    let seeds = trial_seeds(cfg.seed, 3);
    let mut failures = Vec::new();
    let mut table = Table::new(&["check", "size", "instances", "pass"]);

    let mut rng = ChaCha8Rng::seed_from_u64(seeds[0]);
    let mut isometry = Vec::new();
    for n in [2usize, 3, 4] {
        let phi = sign_embedding(n)?;
        let mut ok = true;
        for _ in 0..ISOMETRY_SAMPLES {
            let x: Vec<Q> = (0..n).map(|_| q(rng.gen_range(-60..=60), rng.gen_range(1..=12))).collect();
            let sup = phi.apply(&x).iter().map(abs_q).max().unwrap_or_else(Q::zero);
            let l1 = x.iter().fold(Q::zero(), |a, v| a + abs_q(v));
            ok &= sup == l1;
        }
        if !ok {
            failures.push(format!("sign embedding n={n} is not isometric"));
        }
        table.push(vec!["isometry".into(), n.to_string(), ISOMETRY_SAMPLES.to_string(), ok.to_string()]);
        isometry.push(json!({"n": n, "rows": phi.rows, "samples": ISOMETRY_SAMPLES, "isometric": ok}));
    }

    let mut audits = Vec::new();
    for n in [2usize, 3] {
        let a = flm_bound_audit(&sign_embedding(n)?, &c, NORM_SAMPLES, seeds[1])?;
        if !a.pass {
            failures.push(format!("extraction chain fails at n={n}: {:?}", a.chain));
        }
        table.push(vec!["flm-chain".into(), n.to_string(), "1".into(), a.pass.to_string()]);
        audits.push(json!({"n": n, "m": a.m, "C": fmt_q(&a.c), "q": a.q, "J": a.j, "chain": a.chain, "impliedBound": a.implied_bound, "pass": a.pass, "audit": a}));
    }

    let net_c = qi(2);
    let mut nets = Vec::new();
    for m in [2usize, 3] {
        let net = simplex_net(m, &net_c)?;
        let family_seeds = trial_seeds(Some(seeds[2] ^ m as u64), trials);
        let outcomes = par::map(&family_seeds, |&s| {
            let ws = random_net_family(&net, s);
            simplex_net_intersection(&net, |l| {
                let i = net.lambda.iter().position(|x| x == l).expect("net point");
                ws[i].clone()
            })
            .map(|r| r.point().is_some_and(|p| p.iter().all(|t| *t >= q(1, 2))))
        });
        let mut feasible = 0usize;
        for (s, r) in family_seeds.iter().zip(outcomes) {
            if r? {
                feasible += 1;
            } else {
                failures.push(format!("net m={m} family seed {s}: no point with coordinates ≥ 1/2"));
            }
        }
        table.push(vec!["simplex-net".into(), m.to_string(), trials.to_string(), (feasible == trials).to_string()]);
        nets.push(json!({"m": m, "C": fmt_q(&net_c), "resolution": net.resolution, "netSize": net.lambda.len(), "families": trials, "feasible": feasible}));
    }
    let params = json!({"C": fmt_q(&c), "trials": trials, "netC": fmt_q(&net_c)});
    let witness = json!({"isometry": isometry, "audits": audits, "nets": nets});
    let cert = Certificate::new("banach-chain", params, witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}
