use indeplab::extraction::{equal_split_adversary, equidistributed_maps, half_to_indep_search, SetAdversary};
use indeplab::indep_core::{
    deviant_count_convolution, deviant_count_enumeration, delta1, entropy_h, is_shattered, largest_shattered,
    regular_bound_check, regular_threshold, MapFamily,
};
use indeplab::par;
use indeplab::rational::{binomial, fmt_q, q, to_f64, Q};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{first_failure, rational, trial_seeds, SuiteError, SuiteOutput, SuiteResult};
use crate::cert::{Certificate, Table};
use crate::config::SuiteConfig;

/// Largest `d ≤ n` with `|S| > Σ_{i<d} C(n,i)`.
fn sauer_target(n: usize, size: usize) -> usize {
    let mut below = BigUint::from(0u32);
    let mut d = 0;
    while d < n {
        below += binomial(n as u64, d as u64);
        if BigUint::from(size) > below {
            d += 1;
        } else {
            break;
        }
    }
    d
}

/// `None` when the shattered set reaches the bound, else a description of the family.
fn sauer_check(n: usize, mask: u64) -> Option<String> {
    let maps: Vec<Vec<u8>> =
        (0..1usize << n).filter(|&c| mask >> c & 1 == 1).map(|c| (0..n).map(|i| (c >> i & 1) as u8 + 1).collect()).collect();
    if maps.is_empty() {
        return None;
    }
    let target = sauer_target(n, maps.len());
    let fam = MapFamily::new(n, 2, false, maps).ok()?;
    match largest_shattered(&fam) {
        Ok(j) if j.len() >= target && is_shattered(&fam, &j.indices()) => None,
        Ok(j) => Some(format!("n={n} family {mask:#x}: shattered {} < {target}", j.len())),
        Err(e) => Some(format!("n={n} family {mask:#x}: {e}")),
    }
}

pub fn sauer(cfg: &SuiteConfig) -> SuiteResult {
    let p = &cfg.params;
    let exhaustive_up_to = p.n.unwrap_or(4);
    let sampled = p.sizes.clone().unwrap_or_else(|| vec![5, 6]);
    let trials = p.trials.unwrap_or(100);
    if sampled.iter().any(|&n| n == 0 || n > 6) || exhaustive_up_to > 6 {
        return Err(SuiteError::Config("ground sizes must lie in 1..=6".into()));
    }
    let mut table = Table::new(&["n", "families", "exhaustive", "violations"]);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for n in 1..=exhaustive_up_to {
        let families = 1u64.checked_shl(1 << n).map(|v| v - 1).unwrap_or(u64::MAX);
        if families > cfg.exactness_caps.enumeration {
            return Err(SuiteError::Config(format!("{families} families at n={n} exceed the enumeration cap")));
        }
        let bad: Vec<String> = par::map_range(families as usize, |i| sauer_check(n, i as u64 + 1)).into_iter().flatten().collect();
        table.push(vec![n.to_string(), families.to_string(), "true".into(), bad.len().to_string()]);
        rows.push(json!({"n": n, "families": families, "exhaustive": true, "violations": bad.len()}));
        failures.extend(bad);
    }
    let seeds = trial_seeds(cfg.seed, sampled.len());
    for (&n, &seed) in sampled.iter().zip(&seeds) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = 1u32 << n;
        let masks: Vec<u64> =
            (0..trials).map(|_| if width == 64 { rng.gen::<u64>() } else { rng.gen::<u64>() & ((1u64 << width) - 1) }).collect();
        let bad: Vec<String> = par::map(&masks, |&m| sauer_check(n, m)).into_iter().flatten().collect();
        table.push(vec![n.to_string(), trials.to_string(), "false".into(), bad.len().to_string()]);
        rows.push(json!({"n": n, "families": trials, "exhaustive": false, "violations": bad.len()}));
        failures.extend(bad);
    }
    let params = json!({"exhaustiveUpTo": exhaustive_up_to, "sampledSizes": sampled, "trials": trials, "k": 2});
    let cert = Certificate::new("sauer-shattering", params, json!({ "rows": rows }), first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}

pub fn equal_split(cfg: &SuiteConfig) -> SuiteResult {
    let k = cfg.params.k.unwrap_or(2);
    let sizes = cfg.params.sizes.clone().or(cfg.params.n.map(|n| vec![n])).unwrap_or_else(|| vec![4, 8, 12, 16]);
    let forbidden = k * (1..=k).product::<usize>();
    let tau = q(k as i64 - 1, k as i64);
    let mut table = Table::new(&["n", "maps", "maxJ", "ratio", "exact"]);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut last_ratio: Option<Q> = None;
    for &n in &sizes {
        let adv = equal_split_adversary(k, n)?;
        let got = half_to_indep_search(&adv, &tau)?;
        let c = &got.certificate;
        let ratio = q(c.j.len() as i64, n as i64);
        if !c.verified || !c.exact {
            failures.push(format!("n={n}: search not verified or not exact"));
        }
        if c.j.len() >= forbidden {
            failures.push(format!("n={n}: extendable J of size {}", c.j.len()));
        }
        if last_ratio.as_ref().is_some_and(|r| &ratio > r) {
            failures.push(format!("n={n}: ratio |J|/n increased"));
        }
        table.push(vec![n.to_string(), adv.maps().len().to_string(), c.j.len().to_string(), fmt_q(&ratio), c.exact.to_string()]);
        rows.push(json!({"n": n, "maps": adv.maps().len(), "J": c.j, "exact": c.exact, "verified": c.verified}));
        last_ratio = Some(ratio);
    }
    let params = json!({"k": k, "sizes": sizes, "tau": fmt_q(&tau), "forbiddenSize": forbidden});
    let cert = Certificate::new("equal-split-optimality", params, json!({ "rows": rows }), first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}

pub fn half(cfg: &SuiteConfig) -> SuiteResult {
    let tau = rational(&cfg.params.tau, "3/4")?;
    let sizes = cfg.params.sizes.clone().unwrap_or_else(|| vec![8, 10]);
    let trials = cfg.params.trials.unwrap_or(1000);
    let mut table = Table::new(&["n", "adversaries", "exhaustive", "minJ"]);
    let mut failures = Vec::new();
    let mut rows = Vec::new();

    // every choice of a 3-subset per colouring of [4]
    let maps = equidistributed_maps(4, 2)?;
    let total = 4usize.pow(maps.len() as u32);
    let exhaustive_tau = q(3, 4);
    let sizes_found = par::map_range(total, |code| -> Result<usize, String> {
        let masks: Vec<u64> = (0..maps.len()).map(|i| 0b1111 & !(1u64 << (code / 4usize.pow(i as u32) % 4))).collect();
        let adv = SetAdversary::from_masks(4, 2, Some(exhaustive_tau.clone()), masks).map_err(|e| e.to_string())?;
        let got = half_to_indep_search(&adv, &exhaustive_tau).map_err(|e| e.to_string())?;
        if got.certificate.verified {
            Ok(got.certificate.j.len())
        } else {
            Err(format!("adversary {code}: certificate fails re-check"))
        }
    });
    let mut min_j = usize::MAX;
    for (code, r) in sizes_found.into_iter().enumerate() {
        match r {
            Ok(0) => failures.push(format!("n=4 adversary {code}: no extendable point")),
            Ok(j) => min_j = min_j.min(j),
            Err(e) => failures.push(e),
        }
    }
    table.push(vec!["4".into(), total.to_string(), "true".into(), min_j.to_string()]);
    rows.push(json!({"n": 4, "adversaries": total, "exhaustive": true, "minJ": min_j}));

    let seeds = trial_seeds(cfg.seed, sizes.len() * trials);
    for (i, &n) in sizes.iter().enumerate() {
        let chunk = &seeds[i * trials..(i + 1) * trials];
        let found = par::map(chunk, |&s| -> Result<usize, String> {
            let adv = SetAdversary::random(n, 2, tau.clone(), s).map_err(|e| e.to_string())?;
            let got = half_to_indep_search(&adv, &tau).map_err(|e| e.to_string())?;
            if got.certificate.verified {
                Ok(got.certificate.j.len())
            } else {
                Err(format!("n={n} seed {s}: certificate fails re-check"))
            }
        });
        let mut min_j = usize::MAX;
        for (s, r) in chunk.iter().zip(found) {
            match r {
                Ok(0) => failures.push(format!("n={n} seed {s}: no extendable point")),
                Ok(j) => min_j = min_j.min(j),
                Err(e) => failures.push(e),
            }
        }
        table.push(vec![n.to_string(), trials.to_string(), "false".into(), min_j.to_string()]);
        rows.push(json!({"n": n, "adversaries": trials, "exhaustive": false, "minJ": min_j}));
    }
    let params = json!({"k": 2, "tau": fmt_q(&tau), "exhaustiveN": 4, "sampledSizes": sizes, "trials": trials});
    let cert = Certificate::new("half-extraction-positivity", params, json!({ "rows": rows }), first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}

/// Maximum of a concave function on `[a, b]` by ternary search.
fn concave_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    f((a + b) / 2.0)
}

fn block_variants(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![n]];
    if n >= 2 {
        out.push(vec![n / 2, n - n / 2]);
    }
    if n >= 3 {
        out.push(vec![1, 1, n - 2]);
    }
    out
}

pub fn census(cfg: &SuiteConfig) -> SuiteResult {
    let max_n = cfg.params.n.unwrap_or(12);
    let ks: Vec<usize> = cfg.params.k.map(|k| vec![k]).unwrap_or_else(|| vec![2, 3]);
    let mut table = Table::new(&["k", "n", "instances", "agree"]);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &k in &ks {
        for n in 1..=max_n {
            let colourings = (k as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
            if colourings > cfg.exactness_caps.enumeration {
                return Err(SuiteError::Config(format!("{k}^{n} colourings exceed the enumeration cap")));
            }
            let mut instances = Vec::new();
            for blocks in block_variants(n) {
                for eps in [q(1, 4 * k as i64), q(1, 2 * k as i64), q(1, k as i64)] {
                    for eta in [q(1, 4), q(1, 2)] {
                        instances.push((blocks.clone(), eps.clone(), eta));
                    }
                }
            }
            let results = par::map(&instances, |(blocks, eps, eta)| -> Result<bool, String> {
                let a = deviant_count_convolution(n, k, blocks, eps, eta).map_err(|e| e.to_string())?;
                let b = deviant_count_enumeration(n, k, blocks, eps, eta).map_err(|e| e.to_string())?;
                Ok(a == b)
            });
            let mut agree = 0;
            for ((blocks, eps, eta), r) in instances.iter().zip(results) {
                match r {
                    Ok(true) => agree += 1,
                    Ok(false) => failures.push(format!(
                        "k={k} n={n} blocks {blocks:?} ε={} η={}: counts differ",
                        fmt_q(eps),
                        fmt_q(eta)
                    )),
                    Err(e) => failures.push(e),
                }
            }
            table.push(vec![k.to_string(), n.to_string(), instances.len().to_string(), agree.to_string()]);
            rows.push(json!({"k": k, "n": n, "instances": instances.len(), "agree": agree}));
        }
    }
    let mut entropy = Vec::new();
    let mut worst = 0.0f64;
    for &k in &ks {
        let kf = k as f64;
        for eps in [1.0 / (4.0 * kf), 1.0 / (2.0 * kf)] {
            for eta in [0.25, 0.5, 1.0] {
                let closed = delta1(k, eps, eta)?;
                let h = |t: f64| entropy_h(t, k);
                let centre = 1.0 / kf;
                let mut off = f64::NEG_INFINITY;
                if centre - eps >= 0.0 {
                    off = off.max(concave_max(h, 0.0, centre - eps));
                }
                if centre + eps <= 1.0 {
                    off = off.max(concave_max(h, centre + eps, 1.0));
                }
                let numeric = eta / 2.0 * (h(centre) - off);
                let diff = (closed - numeric).abs();
                worst = worst.max(diff);
                if diff > 1e-9 {
                    failures.push(format!("δ₁ at k={k} ε={eps} η={eta}: closed {closed} vs numeric {numeric}"));
                }
                entropy.push(json!({"k": k, "epsilon": eps, "eta": eta, "closedForm": closed, "numeric": numeric}));
            }
        }
    }
    let params = json!({"maxN": max_n, "k": ks, "tolerance": 1e-9});
    let witness = json!({"counts": rows, "delta1": entropy, "maxDelta1Error": worst});
    let cert = Certificate::new("deviant-census", params, witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}

pub fn regular(cfg: &SuiteConfig) -> SuiteResult {
    let ks: Vec<usize> = cfg.params.k.map(|k| vec![k]).unwrap_or_else(|| vec![2, 3]);
    let deltas: Vec<Q> = match &cfg.params.delta {
        Some(_) => vec![rational(&cfg.params.delta, "")?],
        None => vec![q(1, 10), q(1, 2)],
    };
    let up_to = cfg.params.n.unwrap_or(64);
    let mut table = Table::new(&["k", "delta", "threshold", "from", "to", "holds", "minLogMargin", "exactFallbacks"]);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &k in &ks {
        for delta in &deltas {
            let threshold = regular_threshold(k, to_f64(delta))? as usize;
            let from = threshold.max(1);
            let to = up_to.max(threshold + 64);
            let ns: Vec<usize> = (from..=to).collect();
            let checks = par::map(&ns, |&n| regular_bound_check(k, delta, n));
            let mut min_margin = f64::INFINITY;
            let mut fallbacks = 0;
            let mut holds = true;
            for (n, c) in ns.iter().zip(checks) {
                let c = c?;
                min_margin = min_margin.min(c.log_margin);
                fallbacks += c.exact_fallback as usize;
                if !c.holds {
                    holds = false;
                    failures.push(format!("k={k} δ={} n={n}: count below k^n e^(-δn)", fmt_q(delta)));
                }
            }
            table.push(vec![
                k.to_string(),
                fmt_q(delta),
                threshold.to_string(),
                from.to_string(),
                to.to_string(),
                holds.to_string(),
                format!("{min_margin:.6}"),
                fallbacks.to_string(),
            ]);
            rows.push(json!({
                "k": k, "delta": fmt_q(delta), "threshold": threshold, "from": from, "to": to,
                "holds": holds, "minLogMargin": min_margin, "exactFallbacks": fallbacks,
            }));
        }
    }
    let params = json!({"k": ks, "delta": deltas.iter().map(fmt_q).collect::<Vec<_>>(), "upTo": up_to});
    let cert = Certificate::new("regular-count-bound", params, json!({ "rows": rows }), first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}
