use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::spec::{colour, ToeplitzSpec};
use crate::error::{invalid, Error, Result};

/// Level at which a symbol is fixed, or `Provisional` when no level up to the depth decides it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Determination {
    Level(usize),
    Provisional,
}

impl Serialize for Determination {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Determination::Level(p) => s.serialize_u64(*p as u64),
            Determination::Provisional => s.serialize_str("PROVISIONAL"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SymbolEval {
    pub value: u8,
    pub determined_at_level: Determination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_big")]
    pub period: Option<BigInt>,
}

mod opt_big {
    use num_bigint::BigInt;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(|v| v.to_string()).serialize(s)
    }
}

impl SymbolEval {
    pub fn is_determined(&self) -> bool {
        self.determined_at_level != Determination::Provisional
    }
}

/// Index `q` with `s ≡ y_{p,q}` at level `p`, failing if two residues match.
fn match_at(spec: &ToeplitzSpec, p: usize, r: &BigInt) -> Result<Option<usize>> {
    let n = &spec.n[p - 1];
    let mut hits = spec.y[p - 1].iter().enumerate().filter(|(_, y)| &y.mod_floor(n) == r).map(|(q, _)| q + 1);
    let first = hits.next();
    if let Some(second) = hits.next() {
        return Err(Error::Corrupt(format!("level {p}: residue {r} matches q={} and q={second}", first.unwrap_or(0))));
    }
    Ok(first)
}

/// `(P(s), Q(s))`: the level and index of the residue `s` falls in, if any level up to the depth has one.
pub fn locate(spec: &ToeplitzSpec, s: &BigInt) -> Result<Option<(usize, usize)>> {
    for p in 1..=spec.depth {
        let r = s.mod_floor(&spec.n[p - 1]);
        if let Some(q) = match_at(spec, p, &r)? {
            return Ok(Some((p, q)));
        }
    }
    Ok(None)
}

/// Symbol `x(s)`.
///
/// A 0 is determined at the first level `p` where `s` avoids every `y'_{p,q}`,
/// since all deeper residues sit inside those classes.
pub fn eval_x(spec: &ToeplitzSpec, s: &BigInt) -> Result<SymbolEval> {
    for p in 1..=spec.depth {
        let n = &spec.n[p - 1];
        let r = s.mod_floor(n);
        if let Some(q) = match_at(spec, p, &r)? {
            return Ok(SymbolEval {
                value: colour(p, q),
                determined_at_level: Determination::Level(p),
                q: Some(q),
                period: Some(n.clone()),
            });
        }
        if !spec.y_prime[p - 1].iter().any(|y| y.mod_floor(n) == r) {
            return Ok(SymbolEval {
                value: 0,
                determined_at_level: Determination::Level(p),
                q: None,
                period: Some(n.clone()),
            });
        }
    }
    Ok(SymbolEval { value: 0, determined_at_level: Determination::Provisional, q: None, period: None })
}

const SPOT_CHECK: i64 = 1000;

/// Period of `x` at `s`, spot-checked on `s + t·n` for `|t| ≤ 1000`; `None` when provisional.
pub fn period_certificate(spec: &ToeplitzSpec, s: &BigInt) -> Result<Option<BigInt>> {
    let e = eval_x(spec, s)?;
    let Some(n) = e.period else { return Ok(None) };
    if let (Ok(fast), Some(s0), Some(n0)) = (spec.fast(), s.to_i128(), n.to_i128()) {
        let ok = (-SPOT_CHECK..=SPOT_CHECK).all(|t| {
            let other = fast.eval(s0 + n0 * t as i128);
            other.value == e.value && other.level.is_some()
        });
        if !ok {
            return Err(Error::Corrupt(format!("x({s}) not periodic with period {n}")));
        }
        return Ok(Some(n));
    }
    for t in -SPOT_CHECK..=SPOT_CHECK {
        let other = eval_x(spec, &(s + &n * t))?;
        if other.value != e.value || !other.is_determined() {
            return Err(Error::Corrupt(format!("x({s}) not periodic with period {n} at t={t}")));
        }
    }
    Ok(Some(n))
}

/// Shift `a` (side `{1,2}`) or `b` (side `{3,4}`) realising `sigma` along the anchors.
///
/// The result satisfies `x(anchor_i − a) = sigma[i−1]` for every `i`, checked before returning.
pub fn witness_for_pattern(spec: &ToeplitzSpec, sigma: &[u8]) -> Result<BigInt> {
    let p = sigma.len();
    if p == 0 || p > spec.depth {
        return Err(invalid(format!("pattern length {p} outside 1..={}", spec.depth)));
    }
    let low = sigma.iter().all(|c| matches!(c, 1 | 2));
    let high = sigma.iter().all(|c| matches!(c, 3 | 4));
    if !low && !high {
        return Err(invalid("pattern mixes the sides {1,2} and {3,4}"));
    }
    let mut q = sigma[0] as usize;
    for &c in &sigma[1..] {
        q = if c % 2 == 1 { 2 * q - 1 } else { 2 * q };
    }
    let anchors = if low { &spec.a } else { &spec.b };
    let n = &spec.n[p - 1];
    let a = (&anchors[p - 1] - &spec.y[p - 1][q - 1]).mod_floor(n);
    for (i, &c) in sigma.iter().enumerate() {
        let got = eval_x(spec, &(&anchors[i] - &a))?;
        if got.value != c || !got.is_determined() {
            return Err(Error::Corrupt(format!("witness {a} gives x={} at anchor {}", got.value, i + 1)));
        }
    }
    Ok(a)
}

/// First same-side pair `(p, q1, q2)` where the children's difference drifts from the parents' mod `n_p`.
pub fn difference_check(spec: &ToeplitzSpec) -> Option<(usize, usize, usize)> {
    for p in 1..spec.depth {
        let n = &spec.n[p - 1];
        let half = 1usize << p;
        let rows = &spec.y;
        for q1 in 1..=2 * half {
            for q2 in 1..=2 * half {
                if (q1 <= half) != (q2 <= half) {
                    continue;
                }
                let parent = &rows[p - 1][q1 - 1] - &rows[p - 1][q2 - 1];
                let child = &rows[p][2 * q1 - 2] - &rows[p][2 * q2 - 2];
                if !(child - parent).mod_floor(n).is_zero() {
                    return Some((p, q1, q2));
                }
            }
        }
    }
    None
}

/// Symbols of `x` on `lo..=hi`, with `?` marking provisional zeros.
pub fn window(spec: &ToeplitzSpec, lo: &BigInt, hi: &BigInt) -> Result<String> {
    if lo > hi {
        return Err(invalid("empty window"));
    }
    let mut out = String::new();
    let mut s = lo.clone();
    while &s <= hi {
        let e = eval_x(spec, &s)?;
        out.push(if e.is_determined() { char::from(b'0' + e.value) } else { '?' });
        s += 1;
    }
    Ok(out)
}

/// Outcome of checking periodicity on every coordinate of a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ToeplitzWindowReport {
    pub radius: u64,
    pub checked: u64,
    pub determined: u64,
    pub provisional: u64,
    #[serde(with = "crate::rational::serde_big")]
    pub max_period: BigInt,
    pub all_periodic: bool,
}

/// Period certificates for all `|s| ≤ radius`, each spot-checked on `|t| ≤ 1000`.
pub fn toeplitz_window(spec: &ToeplitzSpec, radius: u64) -> Result<ToeplitzWindowReport> {
    let fast = spec.fast()?;
    let r = radius as i128;
    let coords: Vec<i128> = (-r..=r).collect();
    let results = crate::par::map(&coords, |&s| {
        let e = fast.eval(s);
        let Some(p) = e.level else { return (false, true, 0i128) };
        let n = fast.n[p - 1];
        let ok = (-SPOT_CHECK..=SPOT_CHECK).all(|t| {
            let o = fast.eval(s + n * t as i128);
            o.value == e.value && o.level.is_some()
        });
        (true, ok, n)
    });
    let determined = results.iter().filter(|r| r.0).count() as u64;
    Ok(ToeplitzWindowReport {
        radius,
        checked: coords.len() as u64,
        determined,
        provisional: coords.len() as u64 - determined,
        max_period: BigInt::from(results.iter().map(|r| r.2).max().unwrap_or(0)),
        all_periodic: results.iter().all(|r| r.1),
    })
}
