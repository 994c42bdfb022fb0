use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use super::spec::{colour, FastSpec, ToeplitzSpec};
use crate::error::{invalid, Error, Result};

/// Sets whose independence is audited: a pair of colour cylinders, or the product pair `(A1×A3, A2×A4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditTarget {
    Pair(u8, u8),
    Product,
}

impl fmt::Display for AuditTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditTarget::Pair(i, j) => write!(f, "A{i},A{j}"),
            AuditTarget::Product => write!(f, "A1xA3,A2xA4"),
        }
    }
}

impl Serialize for AuditTarget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl AuditTarget {
    /// Colour patterns for the two points, as `(first-coordinate, second-coordinate)` requirements.
    fn patterns(self) -> Vec<[(u8, u8); 2]> {
        match self {
            AuditTarget::Pair(i, j) => {
                [(i, i), (i, j), (j, i), (j, j)].into_iter().map(|c| [c, c]).collect()
            }
            AuditTarget::Product => [(1, 1), (1, 2), (2, 1), (2, 2)]
                .into_iter()
                .map(|(c1, c2)| [(c1, c2), (c1 + 2, c2 + 2)])
                .collect(),
        }
    }

    fn blocking_property(self) -> &'static str {
        match self {
            AuditTarget::Pair(..) => "(iii)",
            AuditTarget::Product => "(iv)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Blocked,
    Provisional,
    Exact,
}

#[derive(Clone, Copy, Debug)]
struct Class {
    level: usize,
    m: i128,
    r: i128,
    colours: u8,
    exact: bool,
}

/// Residue classes of coordinates carrying each colour: exact ones for levels up to the
/// depth, plus the undecided `y'` classes of the last level with both colours of their side.
fn classes(fast: &FastSpec) -> Vec<Class> {
    let d = fast.depth;
    let mut out = Vec::new();
    for p in 1..=d {
        let m = fast.n[p - 1];
        for (q, &r) in fast.y[p - 1].iter().enumerate() {
            out.push(Class { level: p, m, r: r.rem_euclid(m), colours: 1 << colour(p, q + 1), exact: true });
        }
    }
    let m = fast.n[d - 1];
    let half = 1usize << d;
    for (q, &r) in fast.yp[d - 1].iter().enumerate() {
        let colours = if q < half { 0b0110 } else { 0b11000 };
        out.push(Class { level: d, m, r: r.rem_euclid(m), colours, exact: false });
    }
    out
}

/// For one colour pattern: class pairs keyed by `(min level, (r2 − r1) mod n_min)`.
struct PatternTable {
    exact: HashMap<(usize, i128), Vec<(usize, usize)>>,
    over: HashMap<(usize, i128), ()>,
}

fn pattern_table(cls: &[Class], c1: u8, c2: u8) -> PatternTable {
    let mut exact: HashMap<(usize, i128), Vec<(usize, usize)>> = HashMap::new();
    let mut over = HashMap::new();
    for (i, k1) in cls.iter().enumerate() {
        if k1.colours & (1 << c1) == 0 {
            continue;
        }
        for (j, k2) in cls.iter().enumerate() {
            if k2.colours & (1 << c2) == 0 {
                continue;
            }
            let (level, m) = if k1.m <= k2.m { (k1.level, k1.m) } else { (k2.level, k2.m) };
            let key = (level, (k2.r - k1.r).rem_euclid(m));
            over.insert(key, ());
            if k1.exact && k2.exact {
                exact.entry(key).or_default().push((i, j));
            }
        }
    }
    PatternTable { exact, over }
}

impl PatternTable {
    fn status(&self, fast: &FastSpec, d: i128) -> Status {
        let keys = (1..=fast.depth).map(|p| (p, d.rem_euclid(fast.n[p - 1])));
        let keys: Vec<_> = keys.collect();
        if keys.iter().any(|k| self.exact.contains_key(k)) {
            Status::Exact
        } else if keys.iter().any(|k| self.over.contains_key(k)) {
            Status::Provisional
        } else {
            Status::Blocked
        }
    }

    /// Least `a ∈ [alo, ahi]` with `x(s1 + a) = c1` and `x(s1 + d + a) = c2`, both determined.
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        fast: &FastSpec,
        cls: &[Class],
        c: (u8, u8),
        s1: i128,
        d: i128,
        alo: i128,
        ahi: i128,
    ) -> Option<i128> {
        let mut best: Option<i128> = None;
        for p in 1..=fast.depth {
            let Some(pairs) = self.exact.get(&(p, d.rem_euclid(fast.n[p - 1]))) else { continue };
            for &(i, j) in pairs {
                let (k1, k2) = (cls[i], cls[j]);
                let (m, t0) = if k1.m >= k2.m { (k1.m, k1.r) } else { (k2.m, k2.r - d) };
                let a = alo + (t0 - s1 - alo).rem_euclid(m);
                if a <= ahi && best.map_or(true, |b| a < b) {
                    let (e1, e2) = (fast.eval(s1 + a), fast.eval(s1 + d + a));
                    if e1.value == c.0 && e2.value == c.1 && e1.level.is_some() && e2.level.is_some() {
                        best = Some(a);
                    }
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NearMiss {
    pub difference: i64,
    pub pattern: String,
    pub property: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternShift {
    pub pattern: String,
    pub a: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IndependentPair {
    pub s1: String,
    pub s2: String,
    pub shifts: Vec<PatternShift>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairAuditReport {
    pub target: AuditTarget,
    pub depth: usize,
    pub s_range: [String; 2],
    pub ab_range: [String; 2],
    pub differences: u64,
    pub blocked: u64,
    pub near_misses: u64,
    pub near_miss_examples: Vec<NearMiss>,
    pub inconclusive: u64,
    pub inconclusive_examples: Vec<i64>,
    pub fully_realizable: u64,
    pub independent_pair: Option<IndependentPair>,
    pub max_independent_size: usize,
    pub exhaustive: bool,
}

const EXAMPLES: usize = 16;

fn pattern_name(p: &[(u8, u8); 2], target: AuditTarget) -> String {
    match target {
        AuditTarget::Pair(..) => format!("{}{}", p[0].0, p[0].1),
        AuditTarget::Product => format!("{}{}|{}{}", p[0].0, p[0].1, p[1].0, p[1].1),
    }
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().filter(|v| v.unsigned_abs() < 1u128 << 100).ok_or_else(|| Error::TooLarge(format!("range bound {x}")))
}

/// Default ranges `[−n_2, n_2]` and `[−n_3, n_3]`; needs depth ≥ 3.
pub fn default_audit_ranges(spec: &ToeplitzSpec) -> Result<((BigInt, BigInt), (BigInt, BigInt))> {
    if spec.depth < 3 {
        return Err(invalid("default audit ranges need depth at least 3"));
    }
    let (n2, n3) = (&spec.n[1], &spec.n[2]);
    Ok(((-n2.clone(), n2.clone()), (-n3.clone(), n3.clone())))
}

enum DiffOutcome {
    Blocked { near_miss: Option<String> },
    Inconclusive,
    Realizable,
}

/// Searches for a pair `{s1, s2} ⊆ sRange` that is an independence set for `target`, with shifts in `abRange`.
///
/// Each difference `s2 − s1` is first classified through residue classes: a pattern no
/// coordinate pair at that difference can carry blocks the difference outright, even beyond the
/// depth. Differences with every pattern realised by determined symbols are then searched for
/// explicit shifts inside `abRange`. Differences relying on provisional symbols are reported as
/// inconclusive and never counted as independent.
pub fn pair_independence_audit(
    spec: &ToeplitzSpec,
    target: AuditTarget,
    s_range: (&BigInt, &BigInt),
    ab_range: (&BigInt, &BigInt),
) -> Result<PairAuditReport> {
    if let AuditTarget::Pair(i, j) = target {
        if !(1..=4).contains(&i) || !(1..=4).contains(&j) || i == j {
            return Err(invalid(format!("colours {i},{j} must be distinct in 1..=4")));
        }
    }
    let (slo, shi) = (to_i128(s_range.0)?, to_i128(s_range.1)?);
    let (alo, ahi) = (to_i128(ab_range.0)?, to_i128(ab_range.1)?);
    if slo > shi || alo > ahi {
        return Err(invalid("empty audit range"));
    }
    if shi - slo > 1 << 24 {
        return Err(Error::TooLarge(format!("sRange of width {}", shi - slo)));
    }
    let fast = spec.fast()?;
    let cls = classes(&fast);
    let patterns = target.patterns();
    let mut tables: HashMap<(u8, u8), PatternTable> = HashMap::new();
    for p in &patterns {
        for &c in p {
            tables.entry(c).or_insert_with(|| pattern_table(&cls, c.0, c.1));
        }
    }
    let span = (shi - slo) as usize;
    let outcomes = crate::par::map_range(span, |k| {
        let d = k as i128 + 1;
        let statuses: Vec<Status> = patterns
            .iter()
            .map(|p| p.iter().map(|c| tables[c].status(&fast, d)).min().unwrap_or(Status::Exact))
            .collect();
        let blocked: Vec<usize> = (0..statuses.len()).filter(|&i| statuses[i] == Status::Blocked).collect();
        if !blocked.is_empty() {
            let others_exact = statuses.iter().filter(|&&s| s == Status::Exact).count() == statuses.len() - 1;
            let near_miss = (blocked.len() == 1 && others_exact).then(|| pattern_name(&patterns[blocked[0]], target));
            DiffOutcome::Blocked { near_miss }
        } else if statuses.iter().all(|&s| s == Status::Exact) {
            DiffOutcome::Realizable
        } else {
            DiffOutcome::Inconclusive
        }
    });
    let mut report = PairAuditReport {
        target,
        depth: spec.depth,
        s_range: [slo.to_string(), shi.to_string()],
        ab_range: [alo.to_string(), ahi.to_string()],
        differences: span as u64,
        blocked: 0,
        near_misses: 0,
        near_miss_examples: Vec::new(),
        inconclusive: 0,
        inconclusive_examples: Vec::new(),
        fully_realizable: 0,
        independent_pair: None,
        max_independent_size: 0,
        exhaustive: true,
    };
    for (k, outcome) in outcomes.iter().enumerate() {
        let d = k as i128 + 1;
        match outcome {
            DiffOutcome::Blocked { near_miss } => {
                report.blocked += 1;
                if let Some(pattern) = near_miss {
                    report.near_misses += 1;
                    if report.near_miss_examples.len() < EXAMPLES {
                        report.near_miss_examples.push(NearMiss {
                            difference: d as i64,
                            pattern: pattern.clone(),
                            property: target.blocking_property().to_string(),
                        });
                    }
                }
            }
            DiffOutcome::Inconclusive => {
                report.inconclusive += 1;
                report.exhaustive = false;
                if report.inconclusive_examples.len() < EXAMPLES {
                    report.inconclusive_examples.push(d as i64);
                }
            }
            DiffOutcome::Realizable => {
                report.fully_realizable += 1;
                if report.independent_pair.is_none() {
                    report.independent_pair = window_pair(&fast, &cls, &tables, &patterns, target, d, (slo, shi), (alo, ahi));
                }
            }
        }
    }
    report.max_independent_size = if report.independent_pair.is_some() {
        2
    } else {
        usize::from(singleton_independent(&fast, &cls, target, slo, alo, ahi))
    };
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn window_pair(
    fast: &FastSpec,
    cls: &[Class],
    tables: &HashMap<(u8, u8), PatternTable>,
    patterns: &[[(u8, u8); 2]],
    target: AuditTarget,
    d: i128,
    (slo, shi): (i128, i128),
    (alo, ahi): (i128, i128),
) -> Option<IndependentPair> {
    let starts: Vec<i128> = (slo..=shi - d).collect();
    crate::par::find_first(&starts, |&s1| {
        let mut shifts = Vec::with_capacity(patterns.len());
        for p in patterns {
            let a = tables[&p[0]].solve(fast, cls, p[0], s1, d, alo, ahi)?;
            let b = match target {
                AuditTarget::Pair(..) => None,
                AuditTarget::Product => Some(tables[&p[1]].solve(fast, cls, p[1], s1, d, alo, ahi)?.to_string()),
            };
            shifts.push(PatternShift { pattern: pattern_name(p, target), a: a.to_string(), b });
        }
        Some(IndependentPair { s1: s1.to_string(), s2: (s1 + d).to_string(), shifts })
    })
}

/// Whether `{s}` is independent: every colour the target needs occurs at `s + a` for some `a` in range.
fn singleton_independent(fast: &FastSpec, cls: &[Class], target: AuditTarget, s: i128, alo: i128, ahi: i128) -> bool {
    let needed: Vec<u8> = match target {
        AuditTarget::Pair(i, j) => vec![i, j],
        AuditTarget::Product => vec![1, 2, 3, 4],
    };
    needed.iter().all(|&c| {
        cls.iter().filter(|k| k.exact && k.colours & (1 << c) != 0).any(|k| {
            let a = alo + (k.r - s - alo).rem_euclid(k.m);
            a <= ahi && fast.eval(s + a).value == c
        })
    })
}

#[cfg(test)]
pub(super) fn pattern_status(fast: &FastSpec, c1: u8, c2: u8, d: i128) -> &'static str {
    match pattern_table(&classes(fast), c1, c2).status(fast, d) {
        Status::Blocked => "blocked",
        Status::Provisional => "provisional",
        Status::Exact => "exact",
    }
}
