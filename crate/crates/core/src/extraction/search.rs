use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rational::{fmt_q, q, qi, Q};
use crate::par;

use super::adversary::{min_size, Exponent, FunctionAdversary, SetAdversary, FLOAT_TOL};
use super::engine::{ExtractionCertificate, MaskedInstance, CANDIDATE_CAP};
use super::grid::{threshold_grid, ThresholdGrid};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfExtraction {
    #[serde(with = "crate::rational::serde_q")]
    pub tau: Q,
    /// Whether `τ > (k−1)/k`, the range where a linear-size `J` is guaranteed.
    pub tau_above_split: bool,
    pub certificate: ExtractionCertificate,
}

fn masked_certificate(inst: &MaskedInstance<'_>, thresholds: Option<Vec<Q>>) -> ExtractionCertificate {
    let (j, exact) = inst.largest(CANDIDATE_CAP);
    let witnesses = inst.witnesses(&j);
    ExtractionCertificate { n: inst.n, k: inst.k, j, thresholds, witnesses, verified: false, exact }
}

/// Largest `J` such that every `σ: J → [k]` extends to ψ with `J ⊆ Z_ψ`.
pub fn half_to_indep_search(adversary: &SetAdversary, tau: &Q) -> Result<HalfExtraction> {
    adversary.check_tau(tau)?;
    let k = adversary.k;
    let inst = MaskedInstance { n: adversary.n, k, maps: adversary.maps(), pass: adversary.masks().to_vec() };
    let mut cert = masked_certificate(&inst, None);
    cert.verified = cert.recheck(|psi, _, j| {
        adversary.mask_of(psi).is_some_and(|m| j.iter().all(|&z| m >> z & 1 == 1))
    });
    Ok(HalfExtraction { tau: tau.clone(), tau_above_split: *tau > q(k as i64 - 1, k as i64), certificate: cert })
}

fn passes(v: &Q, threshold: &Q, window: &Q, tol: &Q) -> bool {
    v + tol >= threshold * window
}

/// Largest `J` together with `t ∈ T` such that every `σ: J → [k]` extends to ψ with
/// `f_ψ(z) ≥ t_{σ(z)} n^{−1/p}` on `J`; ties go to the lexicographically first `J`, then `t`.
pub fn func_to_indep_search(adversary: &FunctionAdversary, grid: &ThresholdGrid) -> Result<ExtractionCertificate> {
    if adversary.k != grid.k || adversary.p != grid.p || adversary.c != grid.c || adversary.big_r != grid.big_r {
        return Err(invalid("adversary (k, p, C, R) disagrees with the threshold grid"));
    }
    adversary.validate()?;
    let (n, k) = (adversary.n, adversary.k);
    let window = grid.window_scale(n);
    let tol = match grid.p {
        Exponent::Infinity => Q::zero(),
        Exponent::Finite(_) => crate::rational::from_f64(FLOAT_TOL),
    };
    // per colour, the largest grid index for each distinct predicate class
    let mut per_colour: Vec<Vec<usize>> = vec![vec![2 * grid.m]; k];
    for (psi, f) in adversary.maps().iter().zip(adversary.values()) {
        for (z, v) in f.iter().enumerate() {
            if let Some(i) = grid.index_at_most(v, &window, &tol) {
                per_colour[psi[z] as usize - 1].push(i);
            }
        }
    }
    for c in &mut per_colour {
        c.sort_unstable();
        c.dedup();
    }
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new()];
    for c in &per_colour {
        candidates = candidates
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |&i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    candidates.retain(|t| grid.admits(t));
    let minimal: Vec<Vec<usize>> = candidates
        .iter()
        .filter(|t| !candidates.iter().any(|o| o != *t && o.iter().zip(t.iter()).all(|(a, b)| a <= b)))
        .cloned()
        .collect();
    if minimal.is_empty() {
        return Err(invalid("threshold grid has no admissible entry"));
    }
    let results = par::map(&minimal, |t| {
        let values = grid.values(t);
        let pass: Vec<u64> = adversary
            .maps()
            .iter()
            .zip(adversary.values())
            .map(|(psi, f)| {
                (0..n).filter(|&z| passes(&f[z], &values[psi[z] as usize - 1], &window, &tol)).fold(0u64, |m, z| m | 1 << z)
            })
            .collect();
        let inst = MaskedInstance { n, k, maps: adversary.maps(), pass };
        masked_certificate(&inst, Some(values))
    });
    let best = results
        .into_iter()
        .zip(&minimal)
        .min_by(|(a, ta), (b, tb)| {
            b.j.len().cmp(&a.j.len()).then_with(|| a.j.cmp(&b.j)).then_with(|| ta.cmp(tb))
        })
        .map(|(c, _)| c)
        .expect("nonempty candidate list");
    let mut cert = best;
    let thresholds = cert.thresholds.clone().unwrap_or_default();
    let exact_all = cert.exact;
    cert.verified = cert.recheck(|psi, sigma, j| {
        adversary.values_of(psi).is_some_and(|f| {
            j.iter().zip(sigma).all(|(&z, &s)| passes(&f[z], &thresholds[s as usize - 1], &window, &tol))
        })
    });
    cert.exact = exact_all;
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialExtraction {
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    pub m: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub tau: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub theta: Q,
    pub grid: ThresholdGrid,
    pub certificate: ExtractionCertificate,
}

/// Largest `θ = 2^{−j}` (`j ≥ 0`) with `k/(1/τ + θ) > m − 1`.
pub fn partial_theta(k: usize, m: usize, tau: &Q) -> Result<Q> {
    let mut theta = Q::one();
    for _ in 0..256 {
        if qi(k as i64) / (Q::one() / tau + &theta) > qi(m as i64 - 1) {
            return Ok(theta);
        }
        theta /= qi(2);
    }
    Err(invalid("no dyadic θ found; τ too close to (m−1)/k"))
}

/// The function adversary `f_ψ = (1/τ − 1 + θ)·1_{Z_ψ} − 1_{Z∖Z_ψ}` with `C = max(1, 1/τ−1+θ)`,
/// `R = θτ` and `p = ∞`.
pub fn indicator_function_adversary(adversary: &SetAdversary, tau: &Q, theta: &Q) -> Result<FunctionAdversary> {
    let high = Q::one() / tau - Q::one() + theta;
    let c = if high > Q::one() { high.clone() } else { Q::one() };
    let big_r = theta * tau;
    let n = adversary.n;
    FunctionAdversary::from_fn(n, adversary.k, Exponent::Infinity, c, big_r, |psi| {
        let mask = adversary.mask_of(psi).unwrap_or(0);
        (0..n).map(|z| if mask >> z & 1 == 1 { high.clone() } else { -Q::one() }).collect()
    })
}

/// Largest `J` and `A` (`|A| ≥ m` whenever `J ≠ ∅`) such that every `σ: J → [k]` extends to ψ
/// with `σ^{−1}(A) ⊆ Z_ψ`, found through the function search.
pub fn partial_indep_search(adversary: &SetAdversary, m: usize, tau: &Q) -> Result<PartialExtraction> {
    let k = adversary.k;
    if m == 0 || m > k {
        return Err(invalid(format!("m = {m} outside [1, {k}]")));
    }
    if *tau <= q(m as i64 - 1, k as i64) || *tau > Q::one() {
        return Err(invalid(format!("τ = {} outside ((m−1)/k, 1]", fmt_q(tau))));
    }
    min_size(adversary.n, tau)?;
    adversary.check_tau(tau)?;
    let theta = partial_theta(k, m, tau)?;
    let fadv = indicator_function_adversary(adversary, tau, &theta)?;
    let r = &fadv.big_r / qi(2);
    let grid = threshold_grid(k, &r, &fadv.big_r, &fadv.c, &Exponent::Infinity)?;
    let mut cert = func_to_indep_search(&fadv, &grid)?;
    let t = cert.thresholds.clone().unwrap_or_default();
    let a: Vec<usize> = (0..k).filter(|&j| t[j] > -Q::one()).map(|j| j + 1).collect();
    let set_ok = cert.recheck(|psi, sigma, j| {
        adversary.mask_of(psi).is_some_and(|mask| {
            j.iter().zip(sigma).all(|(&z, &s)| !a.contains(&(s as usize)) || mask >> z & 1 == 1)
        })
    });
    cert.verified = cert.verified && set_ok && (cert.j.is_empty() || a.len() >= m);
    Ok(PartialExtraction { j: cert.j.clone(), a, m, tau: tau.clone(), theta, grid, certificate: cert })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub k: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub tau: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub delta: Q,
    pub w_size: usize,
    #[serde(with = "crate::rational::serde_biguint")]
    pub xi: num_bigint::BigUint,
    /// `|ℛ(Z,k)|·C(⌈τn⌉, |W|)`.
    #[serde(with = "crate::rational::serde_biguint")]
    pub xi_lower_bound: num_bigint::BigUint,
    #[serde(rename = "W")]
    pub w: Vec<usize>,
    pub xi_w: u64,
    pub phi: Vec<u8>,
    pub xi_w_phi: u64,
    pub s_size: u64,
    pub shattered: Vec<usize>,
    /// `|shattered| / |W|`.
    pub empirical_c: f64,
    pub chain_holds: bool,
    /// `|Ξ|` equals its lower bound; expected when every `|Z_ψ| = ⌈τn⌉`.
    pub lower_bound_tight: bool,
}

/// Replays the counting argument: `Ξ`, the best `W`, the best `φ` on `Z∖W`, the restriction set `S`.
pub fn proof_pipeline_half(adversary: &SetAdversary, tau: &Q, delta: &Q, w_size: Option<usize>) -> Result<PipelineReport> {
    use crate::indep_core::{largest_shattered, MapFamily};
    use crate::rational::{binomial, ceil_q};
    use itertools::Itertools;
    use num_bigint::BigUint;

    adversary.check_tau(tau)?;
    let (n, k) = (adversary.n, adversary.k);
    if n > 24 {
        return Err(crate::error::Error::TooLarge(format!("pipeline enumerates subsets of a {n}-set")));
    }
    let w_size = match w_size {
        Some(w) => w,
        None => ceil_q(&(delta * qi(n as i64))).try_into().map_err(|_| invalid("bad δ"))?,
    };
    if w_size == 0 || w_size > n {
        return Err(invalid(format!("|W| = {w_size} outside [1, {n}]")));
    }
    let maps = adversary.maps();
    let masks = adversary.masks();
    let xi: BigUint = masks.iter().map(|m| binomial(m.count_ones() as u64, w_size as u64)).sum();
    let ceil_tau = min_size(n, tau)?;
    let xi_lower_bound = BigUint::from(maps.len()) * binomial(ceil_tau as u64, w_size as u64);
    let subsets: Vec<Vec<usize>> = (0..n).combinations(w_size).collect();
    let counts = par::map(&subsets, |w| {
        let wm = super::adversary::mask_of_indices(w.iter().copied());
        masks.iter().filter(|&&m| m & wm == wm).count() as u64
    });
    let (best_idx, &xi_w) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(&a.0)))
        .expect("at least one subset");
    let w = subsets[best_idx].clone();
    let wm = super::adversary::mask_of_indices(w.iter().copied());
    let rest: Vec<usize> = (0..n).filter(|z| !w.contains(z)).collect();
    let mut groups: std::collections::BTreeMap<Vec<u8>, Vec<Vec<u8>>> = Default::default();
    for (psi, &m) in maps.iter().zip(masks) {
        if m & wm == wm {
            let phi: Vec<u8> = rest.iter().map(|&z| psi[z]).collect();
            groups.entry(phi).or_default().push(w.iter().map(|&z| psi[z]).collect());
        }
    }
    let (phi, restrictions) = groups
        .iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)))
        .map(|(p, r)| (p.clone(), r.clone()))
        .unwrap_or_default();
    let xi_w_phi = restrictions.len() as u64;
    let family = MapFamily::new(w_size, k, false, restrictions)?;
    let s_size = family.len() as u64;
    let shattered = if family.is_empty() { Vec::new() } else { largest_shattered(&family)?.indices() };
    let shattered: Vec<usize> = shattered.iter().map(|&i| w[i]).collect();
    let kpow = num_traits::pow(BigUint::from(k), n - w_size);
    let chain_holds = s_size == xi_w_phi
        && BigUint::from(xi_w_phi) * &kpow >= BigUint::from(xi_w)
        && BigUint::from(xi_w) * binomial(n as u64, w_size as u64) >= xi
        && xi >= xi_lower_bound;
    Ok(PipelineReport {
        n,
        k,
        tau: tau.clone(),
        delta: delta.clone(),
        w_size,
        lower_bound_tight: xi == xi_lower_bound,
        xi,
        xi_lower_bound,
        empirical_c: shattered.len() as f64 / w_size as f64,
        w,
        xi_w,
        phi,
        xi_w_phi,
        s_size,
        shattered,
        chain_holds,
    })
}

