use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::shift::{CylinderSet, PatternPoint};
use crate::error::{invalid, precondition, Error, Result};
use crate::rational::{fmt_q, Q};

/// Probability measure with finitely many atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    atoms: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub point: PatternPoint,
    #[serde(with = "crate::rational::serde_q")]
    pub weight: Q,
}

impl FiniteMeasure {
    /// Merges repeated points; weights must be positive and sum to 1.
    pub fn new(atoms: impl IntoIterator<Item = (PatternPoint, Q)>) -> Result<Self> {
        let mut merged: BTreeMap<PatternPoint, Q> = BTreeMap::new();
        for (p, w) in atoms {
            if w <= Q::zero() {
                return Err(invalid(format!("non-positive weight {}", fmt_q(&w))));
            }
            *merged.entry(p).or_insert_with(Q::zero) += w;
        }
        let total: Q = merged.values().cloned().sum();
        if total != Q::one() {
            return Err(invalid(format!("weights sum to {}", fmt_q(&total))));
        }
        Ok(Self { atoms: merged.into_iter().map(|(point, weight)| Atom { point, weight }).collect() })
    }

    pub fn dirac(point: PatternPoint) -> Self {
        Self { atoms: vec![Atom { point, weight: Q::one() }] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// `λμ + (1 − λ)ν`.
    pub fn mix(&self, other: &FiniteMeasure, lambda: &Q) -> Result<FiniteMeasure> {
        if lambda < &Q::zero() || lambda > &Q::one() {
            return Err(invalid(format!("mixing weight {} outside [0,1]", fmt_q(lambda))));
        }
        let rest = Q::one() - lambda;
        let a = self.atoms.iter().map(|a| (a.point.clone(), &a.weight * lambda));
        let b = other.atoms.iter().map(|a| (a.point.clone(), &a.weight * &rest));
        FiniteMeasure::new(a.chain(b).filter(|(_, w)| !w.is_zero()))
    }
}

pub fn measure_of(nu: &FiniteMeasure, c: &CylinderSet) -> Q {
    nu.atoms.iter().filter(|a| c.contains(&a.point)).map(|a| a.weight.clone()).sum()
}

/// The push-forward `sν`.
pub fn translate(nu: &FiniteMeasure, s: i64) -> FiniteMeasure {
    FiniteMeasure { atoms: nu.atoms.iter().map(|a| Atom { point: a.point.shift(s), weight: a.weight.clone() }).collect() }
}

/// `{ν : ν(C_i) > bound_i for all i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakStarNbhd {
    pub constraints: Vec<NbhdConstraint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NbhdConstraint {
    pub cylinder: CylinderSet,
    #[serde(with = "crate::rational::serde_q")]
    pub bound: Q,
}

impl WeakStarNbhd {
    pub fn new(constraints: impl IntoIterator<Item = (CylinderSet, Q)>) -> Self {
        Self { constraints: constraints.into_iter().map(|(cylinder, bound)| NbhdConstraint { cylinder, bound }).collect() }
    }

    pub fn contains(&self, nu: &FiniteMeasure) -> bool {
        self.violation(nu, 0).is_none()
    }

    /// First constraint index with `(sν)(C) ≤ bound`.
    pub fn violation(&self, nu: &FiniteMeasure, s: i64) -> Option<usize> {
        self.constraints.iter().position(|c| measure_of(nu, &c.cylinder.pullback(s)) <= c.bound)
    }
}

/// Whether `ν ∈ ⋂_{s∈F} s^{-1}U_{σ(s)}`; on failure the offending position.
pub fn in_pattern_nbhd(nu: &FiniteMeasure, f: &[i64], sigma: &[u8], nbhds: &[WeakStarNbhd]) -> Result<Option<i64>> {
    if f.len() != sigma.len() {
        return Err(Error::SizeMismatch { expected: f.len(), found: sigma.len() });
    }
    for (&s, &c) in f.iter().zip(sigma) {
        let u = nbhds.get((c as usize).wrapping_sub(1)).ok_or_else(|| invalid(format!("colour {c} has no neighbourhood")))?;
        if u.violation(nu, s).is_some() {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityExtract {
    pub atom: usize,
    pub point: PatternPoint,
    pub f_psi: Vec<i64>,
    pub mask: Vec<bool>,
    #[serde(with = "crate::rational::serde_q")]
    pub value: Q,
    pub bound_holds: bool,
}

/// Picks the atom of `ν` maximising `Σ_j |F_ψ ∩ ψ^{-1}(j)| / |ψ^{-1}(j)|` where `F_ψ = {s : sx ∈ A_{ψ(s)}}`.
///
/// `levels[j]` is the threshold of `V_j = {ν : ν(A_j) > levels[j]}`; with `ν ∈ ⋂ s^{-1}V_{ψ(s)}` and
/// `levels[0] + levels[1] ≥ 1 + δ` the maximum exceeds `1 + δ`.
pub fn large_density_extract(
    nu: &FiniteMeasure,
    psi: &[(i64, u8)],
    sets: [&CylinderSet; 2],
    levels: [&Q; 2],
    delta: &Q,
) -> Result<DensityExtract> {
    let mut counts = [0i64; 2];
    for &(_, c) in psi {
        match c {
            1 | 2 => counts[c as usize - 1] += 1,
            _ => return Err(invalid(format!("colour {c} outside [2]"))),
        }
    }
    if counts.contains(&0) {
        return Err(precondition("ψ must be onto [2]"));
    }
    let mut seen: Vec<i64> = psi.iter().map(|p| p.0).collect();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("ψ lists a position twice"));
    }
    for &(s, c) in psi {
        let m = measure_of(nu, &sets[c as usize - 1].pullback(s));
        if &m <= levels[c as usize - 1] {
            return Err(precondition(format!("ν(s^-1 A_{c}) = {} not above the level at s={s}", fmt_q(&m))));
        }
    }
    if levels[0] + levels[1] < Q::one() + delta {
        return Err(precondition("levels must sum to at least 1 + δ"));
    }
    let score = |x: &PatternPoint| -> (Q, Vec<bool>) {
        let mask: Vec<bool> = psi.iter().map(|&(s, c)| sets[c as usize - 1].contains(&x.shift(s))).collect();
        let mut v = Q::zero();
        for (hit, &(_, c)) in mask.iter().zip(psi) {
            if *hit {
                v += Q::new(1.into(), counts[c as usize - 1].into());
            }
        }
        (v, mask)
    };
    let mut best: Option<(usize, Q, Vec<bool>)> = None;
    for (i, a) in nu.atoms().iter().enumerate() {
        let (v, mask) = score(&a.point);
        if best.as_ref().map_or(true, |b| v > b.1) {
            best = Some((i, v, mask));
        }
    }
    let (atom, value, mask) = best.ok_or_else(|| invalid("measure without atoms"))?;
    let bound_holds = value > Q::one() + delta;
    if !bound_holds {
        return Err(Error::Corrupt(format!("best atom scores {} ≤ 1 + δ", fmt_q(&value))));
    }
    Ok(DensityExtract {
        atom,
        point: nu.atoms()[atom].point.clone(),
        f_psi: psi.iter().zip(&mask).filter(|(_, &h)| h).map(|(p, _)| p.0).collect(),
        mask,
        value,
        bound_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CombinedWitnesses {
    pub nbhds: Vec<WeakStarNbhd>,
    pub witnesses: Vec<FiniteMeasure>,
    pub max_support: usize,
}

/// Mixes witnesses `μ_σ`, `ν_σ` into `λμ_σ + (1 − λ)ν_σ` and re-verifies them against the mixed neighbourhoods.
///
/// Both neighbourhood lists must use the same cylinders colour by colour; the mixed bound is
/// `λa + (1 − λ)b`.
pub fn convex_witness_combine(
    f: &[i64],
    patterns: &[Vec<u8>],
    mu: (&[FiniteMeasure], &[WeakStarNbhd]),
    nu: (&[FiniteMeasure], &[WeakStarNbhd]),
    lambda: &Q,
) -> Result<CombinedWitnesses> {
    let (mu_w, mu_n) = mu;
    let (nu_w, nu_n) = nu;
    if mu_w.len() != patterns.len() || nu_w.len() != patterns.len() {
        return Err(Error::SizeMismatch { expected: patterns.len(), found: mu_w.len().min(nu_w.len()) });
    }
    if mu_n.len() != nu_n.len() {
        return Err(Error::SizeMismatch { expected: mu_n.len(), found: nu_n.len() });
    }
    let rest = Q::one() - lambda;
    let mut nbhds = Vec::with_capacity(mu_n.len());
    for (a, b) in mu_n.iter().zip(nu_n) {
        if a.constraints.len() != b.constraints.len()
            || a.constraints.iter().zip(&b.constraints).any(|(x, y)| x.cylinder != y.cylinder)
        {
            return Err(invalid("neighbourhoods must list the same cylinders"));
        }
        nbhds.push(WeakStarNbhd::new(
            a.constraints.iter().zip(&b.constraints).map(|(x, y)| (x.cylinder.clone(), &x.bound * lambda + &y.bound * &rest)),
        ));
    }
    let mut witnesses = Vec::with_capacity(patterns.len());
    for (i, sigma) in patterns.iter().enumerate() {
        if let Some(s) = in_pattern_nbhd(&mu_w[i], f, sigma, mu_n)? {
            return Err(precondition(format!("first witness for pattern {i} fails at s={s}")));
        }
        if let Some(s) = in_pattern_nbhd(&nu_w[i], f, sigma, nu_n)? {
            return Err(precondition(format!("second witness for pattern {i} fails at s={s}")));
        }
        let w = mu_w[i].mix(&nu_w[i], lambda)?;
        if let Some(s) = in_pattern_nbhd(&w, f, sigma, &nbhds)? {
            return Err(Error::Corrupt(format!("mixed witness for pattern {i} fails at s={s}")));
        }
        witnesses.push(w);
    }
    let max_support = witnesses.iter().map(FiniteMeasure::support_size).max().unwrap_or(0);
    Ok(CombinedWitnesses { nbhds, witnesses, max_support })
}

