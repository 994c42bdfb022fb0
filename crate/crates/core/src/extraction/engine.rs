use std::collections::HashSet;

use itertools::Itertools;
use serde::Serialize;

use crate::error::Result;
use crate::indep_core::is_equidistributed;
use crate::par;
use crate::rational::Q;

use super::adversary::{equidistributed_maps, mask_of_indices};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub sigma: Vec<u8>,
    pub psi: Vec<u8>,
}

/// A set `J` with one extension `ψ` per pattern `σ: J → [k]`.
///
/// Witnesses are listed by pattern code, with `σ(J[0])` the least significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtractionCertificate {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    #[serde(with = "crate::rational::serde_q_opt_vec")]
    pub thresholds: Option<Vec<Q>>,
    pub witnesses: Vec<Witness>,
    pub verified: bool,
    /// False when a search budget forced a best-found answer.
    pub exact: bool,
}

impl ExtractionCertificate {
    /// Re-checks every witness: equidistributed, extends its σ, and passes `predicate`.
    pub fn recheck(&self, predicate: impl Fn(&[u8], &[u8], &[usize]) -> bool) -> bool {
        let k = self.k;
        let total = match k.checked_pow(self.j.len() as u32) {
            Some(t) => t,
            None => return false,
        };
        if !self.j.is_empty() && self.witnesses.len() != total {
            return false;
        }
        let mut seen = HashSet::new();
        self.witnesses.iter().all(|w| {
            w.psi.len() == self.n
                && is_equidistributed(&w.psi, k)
                && w.sigma.len() == self.j.len()
                && self.j.iter().zip(&w.sigma).all(|(&z, &c)| w.psi[z] == c)
                && seen.insert(w.sigma.clone())
                && predicate(&w.psi, &w.sigma, &self.j)
        })
    }
}

pub(crate) fn pattern_code(psi: &[u8], j: &[usize], k: usize) -> usize {
    j.iter().rev().fold(0usize, |code, &z| code * k + (psi[z] as usize - 1))
}

fn patterns_needed(k: usize, size: usize, maps: usize) -> Option<usize> {
    k.checked_pow(size as u32).filter(|&t| t <= maps)
}

/// `ψ ↦ P_ψ` with the pointwise predicate `J ⊆ P_ψ`; monotone in `J`.
pub(crate) struct MaskedInstance<'a> {
    pub n: usize,
    pub k: usize,
    pub maps: &'a [Vec<u8>],
    pub pass: Vec<u64>,
}

impl MaskedInstance<'_> {
    pub fn covers(&self, j: &[usize]) -> bool {
        let Some(total) = patterns_needed(self.k, j.len(), self.maps.len()) else { return false };
        let jm = mask_of_indices(j.iter().copied());
        let mut seen = vec![false; total];
        let mut hits = 0;
        for (psi, &p) in self.maps.iter().zip(&self.pass) {
            if p & jm != jm {
                continue;
            }
            let code = pattern_code(psi, j, self.k);
            if !seen[code] {
                seen[code] = true;
                hits += 1;
                if hits == total {
                    return true;
                }
            }
        }
        false
    }

    pub fn witnesses(&self, j: &[usize]) -> Vec<Witness> {
        let jm = mask_of_indices(j.iter().copied());
        let total = self.k.pow(j.len() as u32);
        let mut slots: Vec<Option<&Vec<u8>>> = vec![None; total];
        for (psi, &p) in self.maps.iter().zip(&self.pass) {
            if p & jm == jm {
                let code = pattern_code(psi, j, self.k);
                slots[code].get_or_insert(psi);
            }
        }
        slots
            .into_iter()
            .flatten()
            .map(|psi| Witness { sigma: j.iter().map(|&z| psi[z]).collect(), psi: psi.clone() })
            .collect()
    }

    /// Level-wise search; the answer is the lexicographically first set of maximum size.
    pub fn largest(&self, candidate_cap: usize) -> (Vec<usize>, bool) {
        let mut level: Vec<Vec<usize>> = par::map_range(self.n, |z| self.covers(&[z]).then(|| vec![z]))
            .into_iter()
            .flatten()
            .collect();
        if level.is_empty() {
            return (Vec::new(), true);
        }
        let mut exact = true;
        loop {
            let known: HashSet<&[usize]> = level.iter().map(|v| v.as_slice()).collect();
            let s = level[0].len();
            let mut candidates = Vec::new();
            for a in 0..level.len() {
                for b in a + 1..level.len() {
                    if level[a][..s - 1] != level[b][..s - 1] {
                        break;
                    }
                    let mut cand = level[a].clone();
                    cand.push(level[b][s - 1]);
                    let closed = (0..s + 1).all(|drop| {
                        let sub: Vec<usize> =
                            cand.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &z)| z).collect();
                        known.contains(sub.as_slice())
                    });
                    if closed {
                        candidates.push(cand);
                    }
                }
            }
            if candidates.len() > candidate_cap {
                exact = false;
                break;
            }
            let ok = par::map(&candidates, |c| self.covers(c));
            let next: Vec<Vec<usize>> =
                candidates.into_iter().zip(ok).filter(|(_, ok)| *ok).map(|(c, _)| c).collect();
            if next.is_empty() {
                break;
            }
            level = next;
        }
        (level.swap_remove(0), exact)
    }
}

pub(crate) const CANDIDATE_CAP: usize = 2_000_000;

/// Default number of predicate evaluations before falling back to a greedy search.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Largest `J` such that every `σ: J → [k]` extends to some `ψ ∈ ℛ([n],k)` with `predicate(ψ, σ, J)`.
pub fn extendable_core<P>(n: usize, k: usize, predicate: P, maximize: bool) -> Result<ExtractionCertificate>
where
    P: Fn(&[u8], &[u8], &[usize]) -> bool + Sync,
{
    extendable_core_with_budget(n, k, predicate, maximize, DEFAULT_BUDGET)
}

pub fn extendable_core_with_budget<P>(
    n: usize,
    k: usize,
    predicate: P,
    maximize: bool,
    budget: u64,
) -> Result<ExtractionCertificate>
where
    P: Fn(&[u8], &[u8], &[usize]) -> bool + Sync,
{
    let maps = equidistributed_maps(n, k)?;
    let covers = |j: &[usize]| -> bool {
        let Some(total) = patterns_needed(k, j.len(), maps.len()) else { return false };
        let mut seen = vec![false; total];
        let mut hits = 0;
        for psi in &maps {
            let code = pattern_code(psi, j, k);
            if seen[code] {
                continue;
            }
            let sigma: Vec<u8> = j.iter().map(|&z| psi[z]).collect();
            if predicate(psi, &sigma, j) {
                seen[code] = true;
                hits += 1;
                if hits == total {
                    return true;
                }
            }
        }
        false
    };
    let mut cap = 0usize;
    while cap < n && patterns_needed(k, cap + 1, maps.len()).is_some() {
        cap += 1;
    }
    let cost: u128 = (1..=cap)
        .map(|s| crate::rational::binomial(n as u64, s as u64))
        .map(|b| u128::try_from(b).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b))
        .saturating_mul(maps.len() as u128);
    let exhaustive = maximize && cost <= budget as u128;
    let j = if exhaustive {
        (1..=cap)
            .rev()
            .find_map(|s| {
                let combos: Vec<Vec<usize>> = (0..n).combinations(s).collect();
                par::find_first(&combos, |c| covers(c).then(|| c.clone()))
            })
            .unwrap_or_default()
    } else {
        let mut j: Vec<usize> = Vec::new();
        for z in 0..n {
            j.push(z);
            if !covers(&j) {
                j.pop();
            }
        }
        j
    };
    let mut slots: Vec<Option<Witness>> = vec![None; k.pow(j.len() as u32)];
    for psi in &maps {
        let code = pattern_code(psi, &j, k);
        if slots[code].is_none() {
            let sigma: Vec<u8> = j.iter().map(|&z| psi[z]).collect();
            if predicate(psi, &sigma, &j) {
                slots[code] = Some(Witness { sigma, psi: psi.clone() });
            }
        }
    }
    let mut cert = ExtractionCertificate {
        n,
        k,
        j,
        thresholds: None,
        witnesses: slots.into_iter().flatten().collect(),
        verified: false,
        exact: exhaustive,
    };
    cert.verified = cert.recheck(&predicate);
    Ok(cert)
}
