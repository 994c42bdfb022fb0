use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rational::{floor_q, from_f64, q, qi, to_f64, Q};

use super::adversary::Exponent;

/// The finite threshold set `T ⊆ ℚ^k` and the choices of `τ` and `M` behind it.
///
/// Entries are index vectors `i ∈ [2M]^k`; coordinate `j` has value
/// `scale · (−C + (i_j − 1)C/M)` with `scale = τ^{−1/p}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdGrid {
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub p: Exponent,
    #[serde(with = "crate::rational::serde_q")]
    pub tau: Q,
    #[serde(rename = "C", with = "crate::rational::serde_q")]
    pub c: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub r: Q,
    #[serde(rename = "R", with = "crate::rational::serde_q")]
    pub big_r: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub scale: Q,
}

const MAX_ENTRIES: usize = 4_000_000;

/// Builds `T` with `τ` the largest `2^{−j}` (`j ≥ 2`) satisfying `(kτ)^{1/q}C ≤ (R−r)/4`
/// and `M` the least integer with `τ^{−1/p}C/M < (R−r)/2`.
pub fn threshold_grid(k: usize, r: &Q, big_r: &Q, c: &Q, p: &Exponent) -> Result<ThresholdGrid> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(r.is_positive() && r < big_r && big_r <= c) {
        return Err(invalid("threshold grid needs 0 < r < R ≤ C"));
    }
    let gap = big_r - r;
    let mut tau = q(1, 4);
    let mut tries = 0;
    loop {
        let ok = match p {
            Exponent::Infinity => qi(k as i64) * &tau * c <= &gap / qi(4),
            Exponent::Finite(pp) => {
                let inv_q = 1.0 - 1.0 / to_f64(pp);
                (k as f64 * to_f64(&tau)).powf(inv_q) * to_f64(c) <= to_f64(&gap) / 4.0
            }
        };
        if ok {
            break;
        }
        tau /= qi(2);
        tries += 1;
        if tries > 200 {
            return Err(Error::RetryExhausted("no dyadic τ satisfies the grid condition".into()));
        }
    }
    let scale = match p {
        Exponent::Infinity => Q::one(),
        Exponent::Finite(pp) => from_f64(to_f64(&tau).powf(-1.0 / to_f64(pp))),
    };
    // least M with scale·C/M < gap/2, i.e. M > 2·scale·C/gap
    let bound = qi(2) * &scale * c / &gap;
    let m: usize = (floor_q(&bound) + 1u32)
        .try_into()
        .map_err(|_| Error::TooLarge("grid resolution M".into()))?;
    Ok(ThresholdGrid { k, m, p: p.clone(), tau, c: c.clone(), r: r.clone(), big_r: big_r.clone(), scale })
}

impl ThresholdGrid {
    /// Coordinate value for index `i ∈ 1..=2M`.
    pub fn value(&self, i: usize) -> Q {
        let m = qi(self.m as i64);
        &self.scale * (-&self.c + qi(i as i64 - 1) * &self.c / m)
    }

    pub fn values(&self, idx: &[usize]) -> Vec<Q> {
        idx.iter().map(|&i| self.value(i)).collect()
    }

    /// Whether `idx` lies in `[2M]^k` with coordinate mean at least `r`.
    pub fn admits(&self, idx: &[usize]) -> bool {
        idx.len() == self.k
            && idx.iter().all(|&i| (1..=2 * self.m).contains(&i))
            && self.values(idx).iter().fold(Q::zero(), |a, v| a + v) >= qi(self.k as i64) * &self.r
    }

    /// All of `T` as index vectors in lexicographic order.
    pub fn entries(&self) -> Result<Vec<Vec<usize>>> {
        let side = 2 * self.m;
        let total = side.checked_pow(self.k as u32).filter(|&t| t <= MAX_ENTRIES);
        if total.is_none() {
            return Err(Error::TooLarge(format!("(2M)^k with M = {}, k = {}", self.m, self.k)));
        }
        let mut out = Vec::new();
        let mut idx = vec![1usize; self.k];
        loop {
            if self.admits(&idx) {
                out.push(idx.clone());
            }
            let mut pos = self.k;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                if idx[pos] < side {
                    idx[pos] += 1;
                    break;
                }
                idx[pos] = 1;
            }
        }
    }

    /// `n^{−1/p}` as an exact rational for `p = ∞`, else a converted double.
    pub fn window_scale(&self, n: usize) -> Q {
        match &self.p {
            Exponent::Infinity => Q::one(),
            Exponent::Finite(pp) => from_f64((n as f64).powf(-1.0 / to_f64(pp))),
        }
    }

    /// Largest index whose scaled value does not exceed `v`.
    pub(crate) fn index_at_most(&self, v: &Q, window: &Q, tol: &Q) -> Option<usize> {
        let fits = |i: usize| self.value(i) * window <= v + tol;
        if !fits(1) {
            return None;
        }
        let (mut lo, mut hi) = (1usize, 2 * self.m);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Some(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_corner_always_admissible() {
        for k in 1..4 {
            for (r, rr, c) in [(q(1, 4), q(1, 2), qi(2)), (q(1, 10), q(1, 2), q(1, 2)), (q(1, 3), qi(1), qi(3))] {
                for p in [Exponent::Infinity, Exponent::Finite(qi(2)), Exponent::Finite(q(3, 2))] {
                    let g = threshold_grid(k, &r, &rr, &c, &p).unwrap();
                    assert!(g.admits(&vec![2 * g.m; k]));
                    assert!(g.tau < q(1, 2));
                }
            }
        }
    }

    #[test]
    fn every_entry_has_mean_at_least_r() {
        let g = threshold_grid(2, &q(1, 4), &q(1, 2), &qi(2), &Exponent::Infinity).unwrap();
        let entries = g.entries().unwrap();
        assert!(!entries.is_empty());
        for e in &entries {
            let sum: Q = g.values(e).iter().fold(Q::zero(), |a, v| a + v);
            assert!(sum >= qi(2) * q(1, 4));
        }
    }

    #[test]
    fn frozen_corollary_grid() {
        // τ = 1/2, θ = 1: C = 2, R = 1/2, r = 1/4
        let g = threshold_grid(2, &q(1, 4), &q(1, 2), &qi(2), &Exponent::Infinity).unwrap();
        assert_eq!(g.tau, q(1, 64));
        assert_eq!(g.m, 17);
        assert_eq!(g.value(9), q(-18, 17));
        assert_eq!(g.value(34), q(32, 17));
    }

    #[test]
    fn single_colour_grid_keeps_values_above_r() {
        let g = threshold_grid(1, &q(1, 4), &q(1, 2), &qi(1), &Exponent::Infinity).unwrap();
        for e in g.entries().unwrap() {
            assert!(g.value(e[0]) >= q(1, 4));
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(threshold_grid(2, &q(1, 2), &q(1, 4), &qi(1), &Exponent::Infinity).is_err());
        assert!(threshold_grid(2, &q(1, 4), &qi(2), &qi(1), &Exponent::Infinity).is_err());
        assert!(threshold_grid(2, &qi(0), &qi(1), &qi(1), &Exponent::Infinity).is_err());
    }
}
