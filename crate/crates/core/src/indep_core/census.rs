use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::par;
use crate::rational::{binomial, qi, to_f64, Q};

use super::analytic::delta1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusMethod {
    Enumeration,
    Convolution,
}

/// Exact size of the set of colourings that deviate from balance on some large block.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DeviationCensus {
    pub n: usize,
    pub k: usize,
    pub block_sizes: Vec<usize>,
    #[serde(with = "crate::rational::serde_q")]
    pub epsilon: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub eta: Q,
    #[serde(with = "crate::rational::serde_biguint")]
    pub count: BigUint,
    pub method: CensusMethod,
    pub delta1: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
}

fn validate(n: usize, k: usize, blocks: &[usize], epsilon: &Q, eta: &Q) -> Result<()> {
    if k < 2 {
        return Err(invalid("the census needs k ≥ 2"));
    }
    if blocks.contains(&0) || blocks.iter().sum::<usize>() != n {
        return Err(invalid(format!("blocks {blocks:?} do not partition {n} points")));
    }
    if !epsilon.is_positive() || *epsilon > Q::new(BigInt::one(), BigInt::from(k)) {
        return Err(invalid("epsilon must lie in (0, 1/k]"));
    }
    if !eta.is_positive() || *eta > Q::one() {
        return Err(invalid("eta must lie in (0, 1]"));
    }
    Ok(())
}

fn is_large(block: usize, n: usize, eta: &Q) -> bool {
    qi(block as i64) >= eta * qi(n as i64)
}

/// `|c/m − 1/k| ≥ ε`, decided exactly as `|k·c − m| ≥ ε·k·m`.
fn count_deviates(c: usize, m: usize, k: usize, epsilon: &Q) -> bool {
    let lhs = qi((k * c) as i64 - m as i64).abs();
    lhs >= epsilon * qi((k * m) as i64)
}

/// Number of colourings of an `m`-block whose colour counts all stay balanced.
fn balanced_block_count(m: usize, k: usize, epsilon: &Q) -> BigUint {
    let allowed: Vec<usize> = (0..=m).filter(|&c| !count_deviates(c, m, k, epsilon)).collect();
    let mut dp = vec![BigUint::zero(); m + 1];
    dp[0] = BigUint::one();
    for _ in 0..k {
        let mut next = vec![BigUint::zero(); m + 1];
        for (used, ways) in dp.iter().enumerate() {
            if ways.is_zero() {
                continue;
            }
            for &c in &allowed {
                if used + c > m {
                    break;
                }
                next[used + c] += ways * binomial((m - used) as u64, c as u64);
            }
        }
        dp = next;
    }
    dp[m].clone()
}

/// Count by per-block multinomial convolution: blocks are independent coordinates.
pub fn deviant_count_convolution(
    n: usize,
    k: usize,
    blocks: &[usize],
    epsilon: &Q,
    eta: &Q,
) -> Result<BigUint> {
    validate(n, k, blocks, epsilon, eta)?;
    let mut balanced = BigUint::one();
    for &b in blocks {
        if is_large(b, n, eta) {
            balanced *= balanced_block_count(b, k, epsilon);
        } else {
            balanced *= num_traits::pow(BigUint::from(k), b);
        }
    }
    Ok(num_traits::pow(BigUint::from(k), n) - balanced)
}

/// Count by walking all `k^n` colourings.
pub fn deviant_count_enumeration(
    n: usize,
    k: usize,
    blocks: &[usize],
    epsilon: &Q,
    eta: &Q,
) -> Result<BigUint> {
    validate(n, k, blocks, epsilon, eta)?;
    let total = (k as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 32)
        .ok_or_else(|| crate::Error::TooLarge(format!("{k}^{n} colourings")))?;
    let mut spans = Vec::new();
    let mut start = 0;
    for &b in blocks {
        spans.push((start, b, is_large(b, n, eta)));
        start += b;
    }
    // precompute deviance per (block size, colour count)
    let dev = |c: usize, m: usize| count_deviates(c, m, k, epsilon);
    let table: Vec<Vec<bool>> = (0..=n).map(|m| (0..=m).map(|c| dev(c, m)).collect()).collect();
    let chunk = 1u64 << 12;
    let chunks = total.div_ceil(chunk) as usize;
    let counts = par::map_range(chunks, |ci| {
        let lo = ci as u64 * chunk;
        let hi = (lo + chunk).min(total);
        let mut digits = vec![0usize; n];
        let mut found = 0u64;
        for code in lo..hi {
            let mut c = code;
            for d in digits.iter_mut().rev() {
                *d = (c % k as u64) as usize;
                c /= k as u64;
            }
            let deviant = spans.iter().any(|&(s, m, large)| {
                large
                    && (0..k).any(|colour| {
                        let cnt = digits[s..s + m].iter().filter(|&&d| d == colour).count();
                        table[m][cnt]
                    })
            });
            if deviant {
                found += 1;
            }
        }
        found
    });
    Ok(BigUint::from(counts.into_iter().sum::<u64>()))
}

/// Least `N ≥ 3` with `t(t+1)k/η ≤ e^{tδ₁/η + 1}` for every real `t ≥ N`, divided by `η`.
pub fn census_threshold_n1(k: usize, delta1: f64, eta: f64) -> f64 {
    let phi = |t: f64| t * delta1 / eta + 1.0 - (t * (t + 1.0) * k as f64 / eta).ln();
    // φ is convex on t > 0; past its minimiser it increases
    let dphi = |t: f64| delta1 / eta - 1.0 / t - 1.0 / (t + 1.0);
    let n = super::analytic::least_tail_integer(phi, dphi, 3.0);
    n / eta
}

pub fn deviant_map_census(
    n: usize,
    k: usize,
    blocks: &[usize],
    epsilon: &Q,
    eta: &Q,
    enumeration_cap: u64,
) -> Result<DeviationCensus> {
    validate(n, k, blocks, epsilon, eta)?;
    let small = (k as u64).checked_pow(n as u32).is_some_and(|t| t <= enumeration_cap);
    let (count, method) = if small {
        (deviant_count_enumeration(n, k, blocks, epsilon, eta)?, CensusMethod::Enumeration)
    } else {
        (deviant_count_convolution(n, k, blocks, epsilon, eta)?, CensusMethod::Convolution)
    };
    let d1 = delta1(k, to_f64(epsilon), to_f64(eta))?;
    Ok(DeviationCensus {
        n,
        k,
        block_sizes: blocks.to_vec(),
        epsilon: epsilon.clone(),
        eta: eta.clone(),
        count,
        method,
        delta1: d1,
        n1: census_threshold_n1(k, d1, to_f64(eta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn frozen_constant_maps() {
        let c = deviant_map_census(4, 2, &[4], &q(1, 2), &q(1, 2), 1 << 20).unwrap();
        assert_eq!(c.count, BigUint::from(2u32));
        assert_eq!(c.method, CensusMethod::Enumeration);
        let conv = deviant_count_convolution(4, 2, &[4], &q(1, 2), &q(1, 2)).unwrap();
        assert_eq!(conv, BigUint::from(2u32));
    }

    #[test]
    fn small_blocks_contribute_nothing() {
        let c = deviant_map_census(6, 2, &[2, 2, 2], &q(1, 4), &q(1, 2), 1 << 20).unwrap();
        assert!(c.count.is_zero());
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        assert!(deviant_map_census(4, 2, &[4], &q(0, 1), &q(1, 2), 10).is_err());
        assert!(deviant_map_census(4, 2, &[4], &q(3, 5), &q(1, 2), 10).is_err());
        assert!(deviant_map_census(4, 2, &[3], &q(1, 4), &q(1, 2), 10).is_err());
        assert!(deviant_map_census(4, 1, &[4], &q(1, 4), &q(1, 2), 10).is_err());
        assert!(deviant_map_census(4, 2, &[4], &q(1, 4), &q(3, 2), 10).is_err());
    }

    #[test]
    fn threshold_satisfies_its_inequality() {
        for (k, d, eta) in [(2usize, 0.3f64, 0.5f64), (3, 0.05, 0.25), (2, 0.35, 1.0)] {
            let n1 = census_threshold_n1(k, d, eta);
            let n = n1 * eta;
            assert!(n >= 3.0 && n.fract() == 0.0);
            for i in 0..2000 {
                let t = n + i as f64 * 0.37;
                assert!(t * (t + 1.0) * k as f64 / eta <= (t * d / eta + 1.0).exp() * (1.0 + 1e-12));
            }
            if n > 3.0 {
                let violated = (0..1000).map(|i| n - 1.0 + i as f64 / 1000.0).any(|t| {
                    t * (t + 1.0) * k as f64 / eta > (t * d / eta + 1.0).exp()
                });
                assert!(violated);
            }
        }
    }
}
