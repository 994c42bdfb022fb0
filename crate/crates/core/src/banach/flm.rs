use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, precondition, Error, Result};
use crate::extraction::{equidistributed_maps, func_to_indep_search, threshold_grid, Exponent, FunctionAdversary};
use crate::par;
use crate::rational::{from_f64, qi, to_f64, Q};

use super::embedding::{dual_image, LinearMapData, NormValue};
use super::hull::{hull_member, HullMembership, VectorFamily, NORM_TOL};

/// One pattern `σ` on `J`, the colouring that realises it and the chosen `v ∈ E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlmWitness {
    pub sigma: Vec<u8>,
    pub psi: Vec<u8>,
    /// Index of `v` in the family.
    pub member: usize,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub v: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlmCertificate {
    pub n: usize,
    pub p: Exponent,
    #[serde(with = "crate::rational::serde_q")]
    pub delta: Q,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    /// `(t_1, t_2)` with `v(j) ≥ t_1 n^{−1/p}` on colour 1 and `v(j) ≤ t_2 n^{−1/p}` on colour 2.
    #[serde(with = "crate::rational::serde_q_vec")]
    pub thresholds: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub window: Q,
    pub hull_solves: usize,
    pub witnesses: Vec<FlmWitness>,
    pub verified: bool,
    pub exact: bool,
}

impl FlmCertificate {
    /// Re-checks the sign thresholds, `t_1 − t_2 ≥ δ` and one witness per pattern.
    pub fn recheck(&self, family: &VectorFamily) -> bool {
        if self.j.is_empty() {
            return self.witnesses.is_empty();
        }
        if self.thresholds.len() != 2 || &self.thresholds[0] - &self.thresholds[1] < self.delta {
            return false;
        }
        if self.witnesses.len() != 1usize << self.j.len() {
            return false;
        }
        let tol = match self.p {
            Exponent::Infinity => Q::zero(),
            Exponent::Finite(_) => from_f64(NORM_TOL),
        };
        let lo = &self.thresholds[0] * &self.window;
        let hi = &self.thresholds[1] * &self.window;
        let mut seen = HashSet::new();
        self.witnesses.iter().all(|w| {
            family.vectors.get(w.member) == Some(&w.v)
                && w.sigma.len() == self.j.len()
                && seen.insert(w.sigma.clone())
                && self.j.iter().zip(&w.sigma).all(|(&z, &s)| match s {
                    1 => w.v[z] >= &lo - &tol,
                    2 => w.v[z] <= &hi + &tol,
                    _ => false,
                })
        })
    }

    /// Number of distinct vectors among the witnesses.
    pub fn distinct_witnesses(&self) -> usize {
        self.witnesses.iter().map(|w| &w.v).collect::<HashSet<_>>().len()
    }
}

fn sign(c: u8) -> Q {
    if c == 1 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Sign-threshold extraction from a family whose hull contains the `δ`-scaled sign vectors.
///
/// Every equidistributed `ψ` yields a target `g_ψ(i) = ±δ n^{−1/p}`; the member of the hull
/// support with the largest signed sum becomes `v_ψ`, and `f_ψ = ±v_ψ` feeds the function search.
pub fn flm_extract(family: &VectorFamily, delta: &Q) -> Result<FlmCertificate> {
    let n = family.dim;
    let p = family.p.clone();
    if matches!(&p, Exponent::Finite(pp) if pp.is_one()) {
        return Err(invalid("extraction needs p > 1"));
    }
    if !delta.is_positive() || *delta > Q::one() {
        return Err(invalid("δ must lie in (0, 1]"));
    }
    if !family.in_unit_ball() {
        return Err(precondition("family leaves the unit ball"));
    }
    let grid = threshold_grid(2, &(delta / qi(2)), delta, &Q::one(), &p)?;
    let window = grid.window_scale(n);
    let maps = equidistributed_maps(n, 2)?;
    let level = delta * &window;
    let picks = par::map(&maps, |psi| -> Result<usize> {
        let g: Vec<Q> = psi.iter().map(|&c| sign(c) * &level).collect();
        let coeffs = match hull_member(family, &g)? {
            HullMembership::Feasible { coefficients } => coefficients,
            HullMembership::Infeasible { .. } => {
                return Err(precondition(format!("target for ψ = {psi:?} is outside the hull")))
            }
        };
        let signed = |v: &[Q]| psi.iter().zip(v).fold(Q::zero(), |a, (&c, x)| a + sign(c) * x);
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_positive())
            .map(|(i, _)| (i, signed(&family.vectors[i])))
            .fold(None::<(usize, Q)>, |best, (i, s)| match best {
                Some((_, ref b)) if *b >= s => best,
                _ => Some((i, s)),
            })
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Corrupt(format!("empty hull support for ψ = {psi:?}")))
    })
    .into_iter()
    .collect::<Result<Vec<usize>>>()?;
    let lookup = |psi: &[u8]| maps.binary_search_by(|m| m.as_slice().cmp(psi)).map(|i| picks[i]).ok();
    let adversary = FunctionAdversary::from_fn(n, 2, p.clone(), Q::one(), delta.clone(), |psi| {
        let v = &family.vectors[lookup(psi).expect("map enumerated above")];
        psi.iter().zip(v).map(|(&c, x)| sign(c) * x).collect()
    })?;
    let cert = func_to_indep_search(&adversary, &grid)?;
    let thresholds = match (&cert.thresholds, cert.j.is_empty()) {
        (_, true) => Vec::new(),
        (Some(t), false) => vec![t[0].clone(), -t[1].clone()],
        (None, false) => return Err(Error::Corrupt("nonempty J without thresholds".into())),
    };
    let witnesses = if cert.j.is_empty() {
        Vec::new()
    } else {
        cert.witnesses
            .iter()
            .map(|w| {
                let member = lookup(&w.psi).expect("witness is equidistributed");
                FlmWitness { sigma: w.sigma.clone(), psi: w.psi.clone(), member, v: family.vectors[member].clone() }
            })
            .collect()
    };
    let mut out = FlmCertificate {
        n,
        p,
        delta: delta.clone(),
        j: cert.j.clone(),
        thresholds,
        window,
        hull_solves: maps.len(),
        witnesses,
        verified: false,
        exact: cert.exact,
    };
    out.verified = cert.verified && out.recheck(family);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlmAudit {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "C", with = "crate::rational::serde_q")]
    pub c: Q,
    pub q: Exponent,
    pub operator_norm: NormValue,
    pub lower_bound: NormValue,
    /// `‖Φ‖·‖Φ^{-1}‖`.
    #[serde(with = "crate::rational::serde_q")]
    pub distortion: Q,
    pub ball_contained: bool,
    pub ball_exact: bool,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    /// `[2^{|J|}, distinct witnesses, |E′|, 2m]`.
    pub chain: [usize; 4],
    /// `⌊log_2(2m)⌋`, the largest `|J|` the chain allows.
    pub implied_bound: usize,
    pub certificate: FlmCertificate,
    pub pass: bool,
}

/// Checks that `Φ` is a `C`-embedding, then runs the dual-image extraction with `δ = 1/C`
/// and audits `2^{|J|} ≤ #distinct witnesses ≤ |E′| ≤ 2m`.
pub fn flm_bound_audit(phi: &LinearMapData, c: &Q, samples: usize, seed: u64) -> Result<FlmAudit> {
    if *c < Q::one() {
        return Err(invalid("distortion bound C must be at least 1"));
    }
    let (n, m) = (phi.cols, phi.rows);
    let operator_norm = phi.operator_norm();
    let lower_bound = phi.lower_bound(samples, seed)?;
    if !lower_bound.value.is_positive() {
        return Err(precondition("map is not injective"));
    }
    let distortion = &operator_norm.value / &lower_bound.value;
    let within = if operator_norm.exact && lower_bound.exact {
        distortion <= *c
    } else {
        to_f64(&distortion) <= to_f64(c) + NORM_TOL
    };
    if !within {
        return Err(precondition(format!(
            "distortion {} exceeds C = {}",
            crate::rational::fmt_q(&distortion),
            crate::rational::fmt_q(c)
        )));
    }
    let dual = dual_image(phi, c, samples, seed)?;
    let delta = Q::one() / c;
    let certificate = flm_extract(&dual.family, &delta)?;
    let size = certificate.j.len();
    let two_j = 1usize.checked_shl(size as u32).ok_or_else(|| Error::TooLarge("2^|J|".into()))?;
    let chain = [two_j, certificate.distinct_witnesses(), dual.family.len(), 2 * m];
    let implied_bound = (usize::BITS - 1 - (2 * m).leading_zeros()) as usize;
    let pass = certificate.verified
        && dual.ball_contained
        && chain.windows(2).all(|w| w[0] <= w[1])
        && size <= implied_bound;
    Ok(FlmAudit {
        n,
        m,
        c: c.clone(),
        q: phi.q.clone(),
        operator_norm,
        lower_bound,
        distortion,
        ball_contained: dual.ball_contained,
        ball_exact: dual.ball_exact,
        j: certificate.j.clone(),
        chain,
        implied_bound,
        certificate,
        pass,
    })
}
