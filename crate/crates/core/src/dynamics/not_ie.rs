use num_traits::One;
use serde::Serialize;

use super::measure::{in_pattern_nbhd, FiniteMeasure, WeakStarNbhd};
use super::shift::{satisfiable, CylinderSet, PatternPoint, SubshiftSpec};
use crate::error::{invalid, precondition, Error, Result};
use crate::indep_core::{max_independent_subset, PatternOracle, SubsetMask};
use crate::rational::{fmt_q, q, Q};

/// Data of the two-component counterexample: points `x_1, x_2, y_1, y_2`, disjoint cylinder
/// pairs `(V_j, W_j)` around `x_j` and `y_j`, and the neighbourhoods
/// `U_j = {μ : μ(V_j) > λ − ε, μ(W_j) > 1 − λ − ε}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NotIeInstance {
    pub subshift: SubshiftSpec,
    #[serde(with = "crate::rational::serde_q")]
    pub lambda: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub epsilon: Q,
    pub x: [PatternPoint; 2],
    pub y: [PatternPoint; 2],
    pub v: [CylinderSet; 2],
    pub w: [CylinderSet; 2],
    pub u: [WeakStarNbhd; 2],
}

/// `x_1 ≡ 2`, `x_2 ≡ 1`, `y_1` and `y_2` equal to 1 except for a 0 (resp. 2) at the origin.
pub fn not_ie_instance(lambda: &Q, epsilon: &Q) -> Result<NotIeInstance> {
    let half = q(1, 2);
    if !(&half < lambda && lambda < &Q::one()) {
        return Err(invalid("λ must lie in (1/2, 1)"));
    }
    let cap = (lambda - &half).min(Q::one() - lambda);
    if !(epsilon > &Q::from_integer(0.into()) && epsilon < &cap) {
        return Err(invalid(format!("ε must lie in (0, {})", fmt_q(&cap))));
    }
    let v = [CylinderSet::at_origin(2), CylinderSet::at_origin(1)];
    let w = [CylinderSet::at_origin(0), CylinderSet::at_origin(2)];
    let heavy = lambda - epsilon;
    let light = Q::one() - lambda - epsilon;
    let u = [0, 1].map(|j| WeakStarNbhd::new([(v[j].clone(), heavy.clone()), (w[j].clone(), light.clone())]));
    Ok(NotIeInstance {
        subshift: SubshiftSpec::two_component(),
        lambda: lambda.clone(),
        epsilon: epsilon.clone(),
        x: [PatternPoint::constant(2), PatternPoint::constant(1)],
        y: [PatternPoint::new([(0, 0)], 1), PatternPoint::new([(0, 2)], 1)],
        v,
        w,
        u,
    })
}

/// Candidate measures for a pattern `σ` on positions `F`.
pub trait WitnessGenerator: Sync {
    fn name(&self) -> String;
    fn candidates(&self, f: &[i64], sigma: &[u8]) -> Vec<FiniteMeasure>;
}

/// `t·δ_z + (1 − t)·δ_w` where `z` meets `heavy[σ(s)]` and `w` meets `light[σ(s)]` after each shift.
pub struct TwoAtomGenerator {
    pub subshift: SubshiftSpec,
    pub weight: Q,
    pub heavy: Vec<CylinderSet>,
    pub light: Vec<CylinderSet>,
}

impl TwoAtomGenerator {
    pub fn for_instance(inst: &NotIeInstance) -> Self {
        Self {
            subshift: inst.subshift.clone(),
            weight: inst.lambda.clone(),
            heavy: inst.v.to_vec(),
            light: inst.w.to_vec(),
        }
    }

    fn point(&self, f: &[i64], sigma: &[u8], sets: &[CylinderSet]) -> Option<PatternPoint> {
        let cons: Vec<(i64, CylinderSet)> =
            f.iter().zip(sigma).map(|(&s, &c)| (s, sets[c as usize - 1].clone())).collect();
        satisfiable(&self.subshift, &cons).ok()?.witness().cloned()
    }
}

impl WitnessGenerator for TwoAtomGenerator {
    fn name(&self) -> String {
        format!("two-atom(weight={})", fmt_q(&self.weight))
    }

    fn candidates(&self, f: &[i64], sigma: &[u8]) -> Vec<FiniteMeasure> {
        let (Some(z), Some(w)) = (self.point(f, sigma, &self.heavy), self.point(f, sigma, &self.light)) else {
            return Vec::new();
        };
        FiniteMeasure::new([(z, self.weight.clone()), (w, Q::one() - &self.weight)]).into_iter().collect()
    }
}

const MAX_PATTERN_BITS: usize = 20;

struct MeasureOracle<'a, G: WitnessGenerator> {
    n: usize,
    nbhds: &'a [WeakStarNbhd],
    generator: &'a G,
}

impl<G: WitnessGenerator> MeasureOracle<'_, G> {
    fn witness(&self, f: &[i64], sigma: &[u8]) -> Option<FiniteMeasure> {
        self.generator
            .candidates(f, sigma)
            .into_iter()
            .find(|m| matches!(in_pattern_nbhd(m, f, sigma, self.nbhds), Ok(None)))
    }
}

fn patterns(k: usize, len: usize) -> impl Iterator<Item = Vec<u8>> {
    let total = k.pow(len as u32);
    (0..total).map(move |mut code| {
        let mut sigma = vec![1u8; len];
        for slot in sigma.iter_mut().rev() {
            *slot = (code % k) as u8 + 1;
            code /= k;
        }
        sigma
    })
}

impl<G: WitnessGenerator> PatternOracle for MeasureOracle<'_, G> {
    fn index_size(&self) -> usize {
        self.n
    }

    fn arity(&self) -> usize {
        self.nbhds.len()
    }

    fn unrealized_pattern(&self, j: &[usize]) -> Option<Vec<usize>> {
        let f: Vec<i64> = j.iter().map(|&i| i as i64).collect();
        if j.len() > MAX_PATTERN_BITS {
            return Some(vec![1; j.len()]);
        }
        patterns(self.nbhds.len(), j.len())
            .find(|sigma| self.witness(&f, sigma).is_none())
            .map(|sigma| sigma.into_iter().map(usize::from).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternWitness {
    pub sigma: Vec<u8>,
    pub measure: FiniteMeasure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasureAuditReport {
    pub n: usize,
    pub generator: String,
    pub independent: Vec<i64>,
    pub size: usize,
    /// Search completed within budget; maximality is relative to the generator.
    pub exact: bool,
    pub witnesses: Vec<PatternWitness>,
}

/// Largest `F ⊆ [0, n)` on which the generator supplies a verified measure for every pattern.
pub fn measure_indep_audit<G: WitnessGenerator>(
    n: usize,
    nbhds: &[WeakStarNbhd],
    generator: &G,
    budget: u64,
) -> Result<MeasureAuditReport> {
    if n == 0 || nbhds.len() < 2 {
        return Err(invalid("need n ≥ 1 and at least two neighbourhoods"));
    }
    let oracle = MeasureOracle { n, nbhds, generator };
    let best = max_independent_subset(&oracle, &SubsetMask::full(n), budget)?;
    let f: Vec<i64> = best.set.indices().iter().map(|&i| i as i64).collect();
    let witnesses = if f.len() <= MAX_PATTERN_BITS {
        patterns(nbhds.len(), f.len())
            .map(|sigma| {
                let measure = oracle.witness(&f, &sigma).ok_or_else(|| Error::Corrupt("witness vanished".into()))?;
                Ok(PatternWitness { sigma, measure })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(MeasureAuditReport { n, generator: generator.name(), size: f.len(), independent: f, exact: best.exact, witnesses })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointReduction {
    pub f: Vec<i64>,
    pub points: Vec<PatternPoint>,
    /// Every pattern on `F` is covered, so `F` is independent for the light cylinders.
    pub certificate: bool,
}

/// From measure witnesses `ν_σ ∈ ⋂ s^{-1}U_{σ(s)}` with at most two atoms, the lighter atoms `w_σ`,
/// each checked to lie in `⋂ s^{-1}W_{σ(s)}`.
pub fn point_reduction(
    subshift: &SubshiftSpec,
    f: &[i64],
    witnesses: &[PatternWitness],
    nbhds: &[WeakStarNbhd],
    light: &[CylinderSet],
) -> Result<PointReduction> {
    let half = q(1, 2);
    let mut points = Vec::with_capacity(witnesses.len());
    for pw in witnesses {
        if let Some(s) = in_pattern_nbhd(&pw.measure, f, &pw.sigma, nbhds)? {
            return Err(precondition(format!("witness for {:?} leaves the neighbourhood at s={s}", pw.sigma)));
        }
        let atoms = pw.measure.atoms();
        if atoms.len() != 2 {
            return Err(precondition(format!("witness for {:?} needs exactly two atoms", pw.sigma)));
        }
        let (heavy, lighter) = if atoms[0].weight >= atoms[1].weight { (&atoms[0], &atoms[1]) } else { (&atoms[1], &atoms[0]) };
        if heavy.weight <= half {
            return Err(precondition("no atom carries more than half the mass"));
        }
        let w = &lighter.point;
        let cons: Vec<(i64, CylinderSet)> =
            f.iter().zip(&pw.sigma).map(|(&s, &c)| (s, light[c as usize - 1].clone())).collect();
        let inside = cons.iter().all(|(s, c)| c.pullback(*s).contains(w));
        if !inside || !subshift.contains(w) || satisfiable(subshift, &cons)?.witness().is_none() {
            return Err(Error::Corrupt(format!("light atom for {:?} misses the cylinders", pw.sigma)));
        }
        points.push(w.clone());
    }
    let mut seen: Vec<&Vec<u8>> = witnesses.iter().map(|w| &w.sigma).collect();
    seen.sort();
    seen.dedup();
    let k = light.len();
    let certificate = f.len() <= MAX_PATTERN_BITS
        && seen.len() == k.pow(f.len() as u32)
        && seen.iter().all(|s| s.len() == f.len() && s.iter().all(|&c| c >= 1 && c as usize <= k));
    Ok(PointReduction { f: f.to_vec(), points, certificate })
}
