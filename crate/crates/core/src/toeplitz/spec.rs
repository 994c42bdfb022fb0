use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Integer data of the Toeplitz construction, levels `p = 1..=depth` stored at index `p − 1`.
///
/// `y[p][q]` and `yPrime[p][q]` hold the representatives in `[0, n_p)`; the
/// first half of each row (`q ≤ 2^p`) carries colours 1 and 2, the second half 3 and 4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzSpec {
    pub depth: usize,
    #[serde(with = "crate::rational::serde_big_vec")]
    pub n: Vec<BigInt>,
    #[serde(with = "crate::rational::serde_big_mat")]
    pub y: Vec<Vec<BigInt>>,
    #[serde(rename = "yPrime", with = "crate::rational::serde_big_mat")]
    pub y_prime: Vec<Vec<BigInt>>,
    #[serde(with = "crate::rational::serde_big_vec")]
    pub z: Vec<BigInt>,
    #[serde(with = "crate::rational::serde_big_vec")]
    pub u: Vec<BigInt>,
    #[serde(with = "crate::rational::serde_big_vec")]
    pub a: Vec<BigInt>,
    #[serde(with = "crate::rational::serde_big_vec")]
    pub b: Vec<BigInt>,
    pub verified: bool,
}

/// Colour of `y_{p,q}`.
pub fn colour(p: usize, q: usize) -> u8 {
    let first_half = q <= 1 << p;
    match (first_half, q % 2 == 1) {
        (true, true) => 1,
        (true, false) => 2,
        (false, true) => 3,
        (false, false) => 4,
    }
}

/// Least `x > lo` with `x ≡ target (mod m)`.
fn least_above(lo: &BigInt, target: &BigInt, m: &BigInt) -> BigInt {
    let x = lo + 1;
    let shift = Integer::mod_floor(&(target - &x), m);
    x + shift
}

struct Level {
    n: BigInt,
    y: Vec<BigInt>,
    y_prime: Vec<BigInt>,
    z: BigInt,
    u: BigInt,
}

/// Greedy-minimal level `p` on top of `prev = (n_{p−1}, y'_{p−1})`; `bump` raises `n_p` by `bump·n_{p−1}`.
fn build_level(p: usize, prev: Option<(&BigInt, &[BigInt])>, bump: u32) -> Level {
    let one = BigInt::one();
    let m = prev.map_or(one.clone(), |(n, _)| n.clone());
    let half = 1usize << p;
    let full = half << 1;
    let target = |q: usize| -> BigInt { prev.map_or(BigInt::zero(), |(_, yp)| yp[q.div_ceil(2) - 1].clone()) };
    let mut y = Vec::with_capacity(full);
    let mut last = BigInt::from(p);
    for q in 1..=half {
        let v = least_above(&last, &target(q), &m);
        last = v.clone();
        y.push(v);
    }
    let z = least_above(&y[half - 1], &BigInt::zero(), &m);
    let mut y_prime: Vec<BigInt> = y.iter().map(|v| v + &z).collect();
    let gap = y_prime[half - 1].clone();
    for q in half + 1..=full {
        let lo = if q == half + 1 { &gap * 2 } else { &y[q - 2] + &gap };
        y.push(least_above(&lo, &target(q), &m));
    }
    let u = least_above(&y[full - 1], &BigInt::zero(), &m);
    y_prime.extend(y[half..].iter().map(|v| v + &u).collect::<Vec<_>>());
    let bound = if prev.is_none() {
        &y_prime[full - 1] + &y_prime[half - 1] + 1
    } else {
        &y_prime[full - 1] + &y_prime[half - 1] + p + &m
    };
    let n = least_above(&bound, &BigInt::zero(), &m) + &m * bump;
    Level { n, y, y_prime, z, u }
}

const RETRIES: u32 = 64;

/// Builds levels `1..=depth` with the least admissible integers, verifying each level as it goes.
pub fn build_spec(depth: usize) -> Result<ToeplitzSpec> {
    if depth == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    let mut levels: Vec<Level> = Vec::with_capacity(depth);
    for p in 1..=depth {
        let mut bump = 0;
        loop {
            let prev = levels.last().map(|l| (&l.n, l.y_prime.as_slice()));
            let level = build_level(p, prev, bump);
            match level_failure(p, &level.n, &level.y, &level.y_prime) {
                None => {
                    levels.push(level);
                    break;
                }
                Some(what) if bump >= RETRIES => {
                    return Err(Error::RetryExhausted(format!("level {p}: {what}")));
                }
                Some(_) => bump += 1,
            }
        }
    }
    let mut spec = ToeplitzSpec {
        depth,
        a: levels.iter().map(|l| l.y[0].clone()).collect(),
        b: levels.iter().enumerate().map(|(i, l)| l.y[1 << (i + 1)].clone()).collect(),
        n: levels.iter().map(|l| l.n.clone()).collect(),
        z: levels.iter().map(|l| l.z.mod_floor(&l.n)).collect(),
        u: levels.iter().map(|l| l.u.mod_floor(&l.n)).collect(),
        y: levels.iter().map(|l| l.y.iter().map(|v| v.mod_floor(&l.n)).collect()).collect(),
        y_prime: levels.iter().map(|l| l.y_prime.iter().map(|v| v.mod_floor(&l.n)).collect()).collect(),
        verified: false,
    };
    spec.verified = verify_spec(&spec).all_pass;
    if !spec.verified {
        return Err(Error::Corrupt("built construction failed verification".into()));
    }
    Ok(spec)
}

fn level_failure(p: usize, n: &BigInt, y: &[BigInt], yp: &[BigInt]) -> Option<&'static str> {
    let (v, w) = split_sets(p, n, y, yp);
    if distinct_failure(n, y, yp).is_some() {
        return Some("distinctness");
    }
    if property_iii(n, &v, &w).is_some() {
        return Some("(iii)");
    }
    if property_iv(n, &v, &w).is_some() {
        return Some("(iv)");
    }
    if property_v_prime(p, n, yp).is_some() {
        return Some("(v′)");
    }
    None
}

fn split_sets(p: usize, n: &BigInt, y: &[BigInt], yp: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let half = 1usize << p;
    let m = |x: &BigInt| x.mod_floor(n);
    let v = y[..half].iter().chain(&yp[..half]).map(m).collect();
    let w = y[half..].iter().chain(&yp[half..]).map(m).collect();
    (v, w)
}

fn distinct_failure(n: &BigInt, y: &[BigInt], yp: &[BigInt]) -> Option<String> {
    let mut seen = HashSet::new();
    for r in y.iter().chain(yp) {
        let r = r.mod_floor(n);
        if !seen.insert(r.clone()) {
            return Some(format!("residue {r} repeats"));
        }
    }
    None
}

/// `v1 − v2 ≠ v3 − w`.
fn property_iii(n: &BigInt, v: &[BigInt], w: &[BigInt]) -> Option<String> {
    let mut diffs: HashMap<BigInt, (&BigInt, &BigInt)> = HashMap::new();
    for v1 in v {
        for v2 in v {
            diffs.entry((v1 - v2).mod_floor(n)).or_insert((v1, v2));
        }
    }
    for v3 in v {
        for ww in w {
            if let Some((v1, v2)) = diffs.get(&(v3 - ww).mod_floor(n)) {
                return Some(format!("v1={v1} v2={v2} v3={v3} w={ww}"));
            }
        }
    }
    None
}

/// `v1 − v2 ≠ w1 − w2` for distinct `v1, v2`.
fn property_iv(n: &BigInt, v: &[BigInt], w: &[BigInt]) -> Option<String> {
    let mut diffs: HashMap<BigInt, (&BigInt, &BigInt)> = HashMap::new();
    for v1 in v {
        for v2 in v {
            if v1 != v2 {
                diffs.entry((v1 - v2).mod_floor(n)).or_insert((v1, v2));
            }
        }
    }
    for w1 in w {
        for w2 in w {
            if let Some((v1, v2)) = diffs.get(&(w1 - w2).mod_floor(n)) {
                return Some(format!("v1={v1} v2={v2} w1={w1} w2={w2}"));
            }
        }
    }
    None
}

/// No `t ∈ [−p, p]` lies in `{y'_{p,q}}` mod `n_p`.
fn property_v_prime(p: usize, n: &BigInt, yp: &[BigInt]) -> Option<String> {
    let set: HashSet<BigInt> = yp.iter().map(|r| r.mod_floor(n)).collect();
    let p = p as i64;
    (-p..=p).find(|&t| set.contains(&BigInt::from(t).mod_floor(n))).map(|t| format!("t={t}"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl PropertyCheck {
    fn from(failure: Option<String>) -> Self {
        Self { pass: failure.is_none(), counterexample: failure }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub structure: PropertyCheck,
    pub distinct: PropertyCheck,
    pub divisibility: PropertyCheck,
    pub i: PropertyCheck,
    pub ii: PropertyCheck,
    pub iii: PropertyCheck,
    pub iv: PropertyCheck,
    pub v_prime: PropertyCheck,
    pub anchors: PropertyCheck,
    pub all_pass: bool,
}

fn first_failure(mut it: impl Iterator<Item = Option<String>>) -> Option<String> {
    it.find_map(|x| x)
}

fn structure_failure(spec: &ToeplitzSpec) -> Option<String> {
    let d = spec.depth;
    let lens = [spec.n.len(), spec.y.len(), spec.y_prime.len(), spec.z.len(), spec.u.len(), spec.a.len(), spec.b.len()];
    if d == 0 || lens.iter().any(|&l| l != d) {
        return Some(format!("depth {d} with field lengths {lens:?}"));
    }
    for p in 1..=d {
        let want = 1usize << (p + 1);
        if spec.y[p - 1].len() != want || spec.y_prime[p - 1].len() != want {
            return Some(format!("level {p} needs {want} residues"));
        }
        if spec.n[p - 1] <= BigInt::one() {
            return Some(format!("n_{p} must exceed 1"));
        }
    }
    None
}

/// Checks every property level by level over the finite residue sets.
pub fn verify_spec(spec: &ToeplitzSpec) -> PropertyReport {
    let d = spec.depth;
    if let Some(s) = structure_failure(spec) {
        let fail = || PropertyCheck { pass: false, counterexample: Some("structure invalid".into()) };
        return PropertyReport {
            structure: PropertyCheck::from(Some(s)),
            distinct: fail(),
            divisibility: fail(),
            i: fail(),
            ii: fail(),
            iii: fail(),
            iv: fail(),
            v_prime: fail(),
            anchors: fail(),
            all_pass: false,
        };
    }
    let level_sets = |p: usize| split_sets(p, &spec.n[p - 1], &spec.y[p - 1], &spec.y_prime[p - 1]);
    let distinct = first_failure((1..=d).map(|p| {
        distinct_failure(&spec.n[p - 1], &spec.y[p - 1], &spec.y_prime[p - 1]).map(|s| format!("p={p}: {s}"))
    }));
    let divisibility = first_failure((1..d).map(|p| {
        let (lo, hi) = (&spec.n[p - 1], &spec.n[p]);
        (lo >= hi || !hi.is_multiple_of(lo)).then(|| format!("n_{p}={lo} n_{}={hi}", p + 1))
    }));
    let i = first_failure((1..d).map(|p| {
        let n = &spec.n[p - 1];
        (1..=1usize << (p + 1)).find_map(|q| {
            let target = spec.y_prime[p - 1][q - 1].mod_floor(n);
            [&spec.y[p][2 * q - 2], &spec.y[p][2 * q - 1], &spec.y_prime[p][2 * q - 2], &spec.y_prime[p][2 * q - 1]]
                .into_iter()
                .find(|v| v.mod_floor(n) != target)
                .map(|v| format!("p={p} q={q}: {v} ≢ y'={target} mod {n}"))
        })
    }));
    let ii = first_failure((1..=d).map(|p| {
        let n = &spec.n[p - 1];
        (1..=1usize << (p + 1)).find_map(|q| {
            let shift = if q <= 1 << p { &spec.z[p - 1] } else { &spec.u[p - 1] };
            let lhs = (&spec.y_prime[p - 1][q - 1] - &spec.y[p - 1][q - 1] - shift).mod_floor(n);
            (!lhs.is_zero()).then(|| format!("p={p} q={q}"))
        })
    }));
    let iii = first_failure((1..=d).map(|p| {
        let (v, w) = level_sets(p);
        property_iii(&spec.n[p - 1], &v, &w).map(|s| format!("p={p}: {s}"))
    }));
    let iv = first_failure((1..=d).map(|p| {
        let (v, w) = level_sets(p);
        property_iv(&spec.n[p - 1], &v, &w).map(|s| format!("p={p}: {s}"))
    }));
    let v_prime = first_failure(
        (1..=d).map(|p| property_v_prime(p, &spec.n[p - 1], &spec.y_prime[p - 1]).map(|s| format!("p={p}: {s}"))),
    );
    let anchors = first_failure((1..=d).map(|p| {
        let n = &spec.n[p - 1];
        let a_ok = (&spec.a[p - 1] - &spec.y[p - 1][0]).mod_floor(n).is_zero();
        let b_ok = (&spec.b[p - 1] - &spec.y[p - 1][1 << p]).mod_floor(n).is_zero();
        (!(a_ok && b_ok)).then(|| format!("p={p}"))
    }));
    let all_pass = [&distinct, &divisibility, &i, &ii, &iii, &iv, &v_prime, &anchors].iter().all(|c| c.is_none());
    PropertyReport {
        structure: PropertyCheck::from(None),
        distinct: PropertyCheck::from(distinct),
        divisibility: PropertyCheck::from(divisibility),
        i: PropertyCheck::from(i),
        ii: PropertyCheck::from(ii),
        iii: PropertyCheck::from(iii),
        iv: PropertyCheck::from(iv),
        v_prime: PropertyCheck::from(v_prime),
        anchors: PropertyCheck::from(anchors),
        all_pass,
    }
}

impl ToeplitzSpec {
    /// The first `depth` levels.
    pub fn truncate(&self, depth: usize) -> Result<ToeplitzSpec> {
        if depth == 0 || depth > self.depth {
            return Err(invalid(format!("cannot truncate depth {} to {depth}", self.depth)));
        }
        let mut out = self.clone();
        out.depth = depth;
        for v in [&mut out.n, &mut out.z, &mut out.u, &mut out.a, &mut out.b] {
            v.truncate(depth);
        }
        out.y.truncate(depth);
        out.y_prime.truncate(depth);
        Ok(out)
    }

    /// Machine-width copy for bulk evaluation; needs `n_depth < 2^100`.
    pub fn fast(&self) -> Result<FastSpec> {
        if let Some(s) = structure_failure(self) {
            return Err(invalid(s));
        }
        let conv = |x: &BigInt| x.to_i128().filter(|v| v.unsigned_abs() < 1u128 << 100);
        let n: Option<Vec<i128>> = self.n.iter().map(conv).collect();
        let y: Option<Vec<Vec<i128>>> = self.y.iter().map(|r| r.iter().map(conv).collect()).collect();
        let yp: Option<Vec<Vec<i128>>> = self.y_prime.iter().map(|r| r.iter().map(conv).collect()).collect();
        let (Some(n), Some(y), Some(yp)) = (n, y, yp) else {
            return Err(Error::TooLarge("periods exceed the 100-bit fast path".into()));
        };
        let ymap = y
            .iter()
            .zip(&n)
            .map(|(row, &m)| row.iter().enumerate().map(|(q, &r)| (r.rem_euclid(m), q + 1)).collect())
            .collect();
        let ypset =
            yp.iter().zip(&n).map(|(row, &m)| row.iter().map(|&r| r.rem_euclid(m)).collect()).collect();
        Ok(FastSpec { depth: self.depth, n, y, yp, ymap, ypset })
    }
}

/// `i128` mirror of a [`ToeplitzSpec`] with residue lookup tables.
#[derive(Clone, Debug)]
pub struct FastSpec {
    pub depth: usize,
    pub n: Vec<i128>,
    pub y: Vec<Vec<i128>>,
    pub yp: Vec<Vec<i128>>,
    ymap: Vec<HashMap<i128, usize>>,
    ypset: Vec<HashSet<i128>>,
}

/// Symbol at one coordinate: `level` is `None` when the value is a provisional 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FastEval {
    pub value: u8,
    pub level: Option<usize>,
    pub q: Option<usize>,
}

impl FastSpec {
    pub fn eval(&self, s: i128) -> FastEval {
        for p in 1..=self.depth {
            let r = s.rem_euclid(self.n[p - 1]);
            if let Some(&q) = self.ymap[p - 1].get(&r) {
                return FastEval { value: colour(p, q), level: Some(p), q: Some(q) };
            }
            if !self.ypset[p - 1].contains(&r) {
                return FastEval { value: 0, level: Some(p), q: None };
            }
        }
        FastEval { value: 0, level: None, q: None }
    }
}
