use num_traits::{Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{invalid, precondition, Error, Result};
use crate::indep_core::{enumerate_equidistributed, equidistributed_count};
use crate::rational::{ceil_q, fmt_q, parse_q, qi, to_f64, Q};

/// Largest ground set the extraction searches will enumerate `ℛ(Z,k)` over.
pub const MAX_MAPS: u64 = 4_000_000;

/// Lexicographically ordered `ℛ([n], k)`, colours `1..=k`.
pub fn equidistributed_maps(n: usize, k: usize) -> Result<Vec<Vec<u8>>> {
    if k == 0 || n == 0 {
        return Err(invalid("need n ≥ 1 and k ≥ 1"));
    }
    if n > 64 {
        return Err(Error::TooLarge(format!("ground size {n} exceeds 64")));
    }
    let count = equidistributed_count(n, k);
    if count > MAX_MAPS.into() {
        return Err(Error::TooLarge(format!("|ℛ([{n}],{k})| = {count}")));
    }
    Ok(enumerate_equidistributed(n, k).collect())
}

pub(crate) fn mask_of_indices(indices: impl IntoIterator<Item = usize>) -> u64 {
    indices.into_iter().fold(0u64, |m, i| m | (1u64 << i))
}

/// `ψ ↦ Z_ψ` over all of `ℛ([n],k)`, with `Z_ψ` a bit mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetAdversary {
    pub n: usize,
    pub k: usize,
    pub tau: Option<Q>,
    pub seed: Option<u64>,
    maps: Vec<Vec<u8>>,
    masks: Vec<u64>,
}

impl SetAdversary {
    /// `masks[i]` is `Z_ψ` for the `i`-th map of [`equidistributed_maps`].
    pub fn from_masks(n: usize, k: usize, tau: Option<Q>, masks: Vec<u64>) -> Result<Self> {
        let maps = equidistributed_maps(n, k)?;
        Self::with_maps(n, k, tau, maps, masks)
    }

    pub(crate) fn with_maps(
        n: usize,
        k: usize,
        tau: Option<Q>,
        maps: Vec<Vec<u8>>,
        masks: Vec<u64>,
    ) -> Result<Self> {
        if masks.len() != maps.len() {
            return Err(Error::SizeMismatch { expected: maps.len(), found: masks.len() });
        }
        let universe = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if let Some(bad) = masks.iter().position(|m| m & !universe != 0) {
            return Err(invalid(format!("Z_ψ for ψ = {:?} leaves the ground set", maps[bad])));
        }
        let adv = Self { n, k, tau, seed: None, maps, masks };
        if let Some(t) = adv.tau.clone() {
            adv.check_tau(&t)?;
        }
        Ok(adv)
    }

    pub fn from_fn(n: usize, k: usize, tau: Option<Q>, f: impl Fn(&[u8]) -> u64) -> Result<Self> {
        let maps = equidistributed_maps(n, k)?;
        let masks = maps.iter().map(|m| f(m)).collect();
        Self::with_maps(n, k, tau, maps, masks)
    }

    /// `Z_ψ = Z` for every ψ.
    pub fn full(n: usize, k: usize) -> Result<Self> {
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::from_fn(n, k, Some(qi(1)), |_| all)
    }

    /// Each `Z_ψ` uniform of a uniform size in `[⌈τn⌉, n]`, drawn in map order.
    pub fn random(n: usize, k: usize, tau: Q, seed: u64) -> Result<Self> {
        let min = min_size(n, &tau)?;
        let maps = equidistributed_maps(n, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let masks = maps
            .iter()
            .map(|_| {
                let size = rng.gen_range(min..=n);
                mask_of_indices(sample(&mut rng, n, size))
            })
            .collect();
        let mut adv = Self::with_maps(n, k, Some(tau), maps, masks)?;
        adv.seed = Some(seed);
        Ok(adv)
    }

    pub fn maps(&self) -> &[Vec<u8>] {
        &self.maps
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn mask_of(&self, psi: &[u8]) -> Option<u64> {
        self.maps.binary_search_by(|m| m.as_slice().cmp(psi)).ok().map(|i| self.masks[i])
    }

    pub fn min_set_size(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones() as usize).min().unwrap_or(0)
    }

    /// Rejects the adversary unless `|Z_ψ| ≥ τn` for every ψ.
    pub fn check_tau(&self, tau: &Q) -> Result<()> {
        let min = min_size(self.n, tau)?;
        for (psi, m) in self.maps.iter().zip(&self.masks) {
            if (m.count_ones() as usize) < min {
                return Err(precondition(format!(
                    "|Z_ψ| = {} < τn = {} for ψ = {psi:?}",
                    m.count_ones(),
                    fmt_q(&(tau * qi(self.n as i64)))
                )));
            }
        }
        Ok(())
    }
}

/// `⌈τn⌉` for `τ ∈ (0,1]`.
pub(crate) fn min_size(n: usize, tau: &Q) -> Result<usize> {
    if !tau.is_positive() || *tau > qi(1) {
        return Err(invalid(format!("τ = {} outside (0,1]", fmt_q(tau))));
    }
    let c = ceil_q(&(tau * qi(n as i64)));
    Ok(c.try_into().unwrap_or(usize::MAX))
}

/// The exponent `p ∈ (1, ∞]` of an `ℓ_p` norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Finite(Q),
    Infinity,
}

impl Exponent {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinity);
        }
        let p = parse_q(t)?;
        if p <= qi(1) {
            return Err(invalid(format!("p = {t} must exceed 1")));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Finite(p) => to_f64(p),
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p` (zero for `p = ∞`).
    pub fn reciprocal_f64(&self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / to_f64(p),
            Exponent::Infinity => 0.0,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{}", fmt_q(p)),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub(crate) const FLOAT_TOL: f64 = 1e-12;

/// `ψ ↦ f_ψ : Z → ℚ` over all of `ℛ([n],k)`, with declared `(p, C, R)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionAdversary {
    pub n: usize,
    pub k: usize,
    pub p: Exponent,
    pub c: Q,
    pub big_r: Q,
    pub seed: Option<u64>,
    maps: Vec<Vec<u8>>,
    values: Vec<Vec<Q>>,
}

impl FunctionAdversary {
    pub fn from_fn(
        n: usize,
        k: usize,
        p: Exponent,
        c: Q,
        big_r: Q,
        f: impl Fn(&[u8]) -> Vec<Q>,
    ) -> Result<Self> {
        let maps = equidistributed_maps(n, k)?;
        let values: Vec<Vec<Q>> = maps.iter().map(|m| f(m)).collect();
        for v in &values {
            if v.len() != n {
                return Err(Error::SizeMismatch { expected: n, found: v.len() });
            }
        }
        let adv = Self { n, k, p, c, big_r, seed: None, maps, values };
        adv.validate()?;
        Ok(adv)
    }

    pub fn maps(&self) -> &[Vec<u8>] {
        &self.maps
    }

    pub fn values(&self) -> &[Vec<Q>] {
        &self.values
    }

    pub fn values_of(&self, psi: &[u8]) -> Option<&[Q]> {
        self.maps
            .binary_search_by(|m| m.as_slice().cmp(psi))
            .ok()
            .map(|i| self.values[i].as_slice())
    }

    /// Checks `‖f_ψ‖_p ≤ C` and `n^{−1/q} Σ f_ψ ≥ R` for every ψ.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for (psi, f) in self.maps.iter().zip(&self.values) {
            let (norm_ok, mean_ok) = match &self.p {
                Exponent::Infinity => {
                    let norm_ok = f.iter().all(|v| v.abs() <= self.c);
                    let sum: Q = f.iter().fold(Q::zero(), |a, v| a + v);
                    (norm_ok, sum >= &self.big_r * qi(n as i64))
                }
                Exponent::Finite(p) => {
                    let pf = to_f64(p);
                    let norm = f.iter().map(|v| to_f64(v).abs().powf(pf)).sum::<f64>().powf(1.0 / pf);
                    let sum: f64 = f.iter().map(to_f64).sum();
                    let inv_q = 1.0 - 1.0 / pf;
                    (
                        norm <= to_f64(&self.c) + FLOAT_TOL,
                        sum / (n as f64).powf(inv_q) >= to_f64(&self.big_r) - FLOAT_TOL,
                    )
                }
            };
            if !norm_ok {
                return Err(precondition(format!("‖f_ψ‖_p exceeds C for ψ = {psi:?}")));
            }
            if !mean_ok {
                return Err(precondition(format!("normalised sum of f_ψ is below R for ψ = {psi:?}")));
            }
        }
        Ok(())
    }
}
