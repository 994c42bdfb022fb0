use indeplab::toeplitz::{
    build_spec, default_audit_ranges, difference_check, pair_independence_audit, period_certificate, toeplitz_window,
    verify_spec, window, witness_for_pattern, AuditTarget,
};
use num_bigint::BigInt;
use serde_json::json;

use super::{first_failure, SuiteError, SuiteOutput, SuiteResult};
use crate::cert::{Certificate, Table};
use crate::config::SuiteConfig;

pub fn build(cfg: &SuiteConfig) -> SuiteResult {
    let depth = cfg.params.depth.unwrap_or(4);
    let radius = cfg.params.window.unwrap_or(10_000);
    let spec = build_spec(depth)?;
    let report = verify_spec(&spec);
    let drift = difference_check(&spec);
    let win = toeplitz_window(&spec, radius)?;
    let mut failures = Vec::new();
    if !report.all_pass {
        failures.push("construction properties fail".to_string());
    }
    if let Some((p, a, b)) = drift {
        failures.push(format!("difference congruence fails at level {p} for ({a}, {b})"));
    }
    if !win.all_periodic || win.provisional > 0 {
        failures.push(format!("{} of {} window coordinates lack a period certificate", win.checked - win.determined, win.checked));
    }
    let mut table = Table::new(&["level", "period", "z", "u"]);
    for p in 0..depth {
        table.push(vec![(p + 1).to_string(), spec.n[p].to_string(), spec.z[p].to_string(), spec.u[p].to_string()]);
    }
    let spec_json = serde_json::to_string_pretty(&spec).expect("spec serializes") + "\n";
    let witness = json!({"spec": spec, "properties": report, "differenceCheck": drift.is_none(), "window": win});
    let cert = Certificate::new("toeplitz-construction", json!({"depth": depth, "window": radius}), witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: vec![(format!("toeplitz-spec-depth{depth}.json"), spec_json)] })
}

pub fn independence(cfg: &SuiteConfig) -> SuiteResult {
    let depth = cfg.params.depth.unwrap_or(4);
    let spec = build_spec(depth)?;
    let mut failures = Vec::new();
    let mut patterns = Vec::new();
    for (lo, hi) in [(1u8, 2u8), (3, 4)] {
        for p in 1..=depth {
            let mut found = 0usize;
            for code in 0..1usize << p {
                let sigma: Vec<u8> = (0..p).map(|i| if code >> i & 1 == 0 { lo } else { hi }).collect();
                match witness_for_pattern(&spec, &sigma) {
                    Ok(_) => found += 1,
                    Err(e) => failures.push(format!("pattern {sigma:?}: {e}")),
                }
            }
            patterns.push(json!({"side": [lo, hi], "length": p, "patterns": 1usize << p, "witnessed": found}));
        }
    }
    let (s, ab) = default_audit_ranges(&spec)?;
    let targets = [
        AuditTarget::Pair(1, 3),
        AuditTarget::Pair(1, 4),
        AuditTarget::Pair(2, 3),
        AuditTarget::Pair(2, 4),
        AuditTarget::Product,
    ];
    let mut table = Table::new(&["target", "differences", "blocked", "inconclusive", "maxSize", "exhaustive"]);
    let mut audits = Vec::new();
    for t in targets {
        let r = pair_independence_audit(&spec, t, (&s.0, &s.1), (&ab.0, &ab.1))?;
        if r.max_independent_size > 1 {
            failures.push(format!("{t}: independent pair found"));
        }
        if !r.exhaustive {
            failures.push(format!("{t}: audit not exhaustive ({} inconclusive)", r.inconclusive));
        }
        table.push(vec![
            t.to_string().replace(',', " "),
            r.differences.to_string(),
            r.blocked.to_string(),
            r.inconclusive.to_string(),
            r.max_independent_size.to_string(),
            r.exhaustive.to_string(),
        ]);
        audits.push(r);
    }
    let params = json!({"depth": depth, "sRange": [s.0.to_string(), s.1.to_string()], "abRange": [ab.0.to_string(), ab.1.to_string()]});
    let witness = json!({"patterns": patterns, "audits": audits});
    let cert = Certificate::new("toeplitz-independence", params, witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}

pub fn eval(cfg: &SuiteConfig) -> SuiteResult {
    let depth = cfg.params.depth.unwrap_or(3);
    let [lo, hi] = cfg.params.range.unwrap_or([-40, 40]);
    if hi - lo > 100_000 {
        return Err(SuiteError::Config("evaluation range is limited to 100001 coordinates".into()));
    }
    let spec = build_spec(depth)?;
    let text = window(&spec, &BigInt::from(lo), &BigInt::from(hi))?;
    let mut table = Table::new(&["s", "symbol", "period"]);
    let mut failures = Vec::new();
    let mut determined = 0usize;
    for (s, ch) in (lo..=hi).zip(text.chars()) {
        let period = period_certificate(&spec, &BigInt::from(s))?;
        match (&period, ch) {
            (Some(_), _) => determined += 1,
            (None, '?') => {}
            (None, _) => failures.push(format!("s={s}: determined symbol without a period certificate")),
        }
        table.push(vec![s.to_string(), ch.to_string(), period.map(|p| p.to_string()).unwrap_or_default()]);
    }
    let witness = json!({"window": text, "determined": determined, "provisional": (hi - lo + 1) as usize - determined});
    let cert = Certificate::new("toeplitz-window", json!({"depth": depth, "range": [lo, hi]}), witness, first_failure(&failures), cfg.seed);
    Ok(SuiteOutput { certificate: cert, table, artifacts: Vec::new() })
}
