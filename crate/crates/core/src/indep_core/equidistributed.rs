use num_bigint::BigUint;
use num_traits::One;

use crate::rational::factorial;

/// Colourings of `{0,…,n-1}` by `1..=k` in which every colour class has size
/// ⌊n/k⌋ or ⌈n/k⌉, produced in lexicographic order.
#[derive(Clone, Debug)]
pub struct EquidistributedMaps {
    n: usize,
    k: usize,
    floor: usize,
    extra: usize,
    current: Option<Vec<u8>>,
    counts: Vec<usize>,
    started: bool,
}

pub fn enumerate_equidistributed(n: usize, k: usize) -> EquidistributedMaps {
    assert!(k >= 1 && k <= u8::MAX as usize, "arity must lie in 1..=255");
    EquidistributedMaps {
        n,
        k,
        floor: n / k,
        extra: n % k,
        current: None,
        counts: vec![0; k + 1],
        started: false,
    }
}

impl EquidistributedMaps {
    fn cap(&self) -> usize {
        if self.extra == 0 {
            self.floor
        } else {
            self.floor + 1
        }
    }

    fn can_add(&self, c: usize) -> bool {
        let next = self.counts[c] + 1;
        if next > self.cap() {
            return false;
        }
        if self.extra > 0 && next == self.floor + 1 {
            let full = (1..=self.k).filter(|&j| self.counts[j] == self.floor + 1).count();
            return full < self.extra;
        }
        true
    }

    /// Fills positions `from..n` with the smallest feasible colours.
    fn fill(&mut self, map: &mut [u8], from: usize) -> bool {
        for slot in map.iter_mut().skip(from) {
            let Some(c) = (1..=self.k).find(|&c| self.can_add(c)) else { return false };
            *slot = c as u8;
            self.counts[c] += 1;
        }
        true
    }
}

impl Iterator for EquidistributedMaps {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if !self.started {
            self.started = true;
            let mut map = vec![0u8; self.n];
            if !self.fill(&mut map, 0) {
                return None;
            }
            self.current = Some(map.clone());
            return Some(map);
        }
        let mut map = self.current.take()?;
        for i in (0..self.n).rev() {
            let old = map[i] as usize;
            self.counts[old] -= 1;
            let next = (old + 1..=self.k).find(|&c| self.can_add(c));
            if let Some(c) = next {
                map[i] = c as u8;
                self.counts[c] += 1;
                if self.fill(&mut map, i + 1) {
                    self.current = Some(map.clone());
                    return Some(map);
                }
                unreachable!("a feasible prefix always has a feasible completion");
            }
        }
        None
    }
}

/// Exact number of equidistributed colourings: `C(k, r) · n! / ((q+1)!^r · q!^(k−r))`.
pub fn equidistributed_count(n: usize, k: usize) -> BigUint {
    let q = n / k;
    let r = n % k;
    let choose = crate::rational::binomial(k as u64, r as u64);
    let mut denom = BigUint::one();
    for _ in 0..r {
        denom *= factorial(q as u64 + 1);
    }
    for _ in r..k {
        denom *= factorial(q as u64);
    }
    choose * factorial(n as u64) / denom
}

pub fn is_equidistributed(map: &[u8], k: usize) -> bool {
    let n = map.len();
    let mut counts = vec![0usize; k + 1];
    for &c in map {
        if c == 0 || c as usize > k {
            return false;
        }
        counts[c as usize] += 1;
    }
    // ||ψ^{-1}(j)| − n/k| < 1  ⇔  |k·|ψ^{-1}(j)| − n| < k
    counts[1..].iter().all(|&c| (k * c).abs_diff(n) < k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, k: usize) -> Vec<Vec<u8>> {
        let total = k.pow(n as u32);
        let mut out = Vec::new();
        for mut code in 0..total {
            let mut m = vec![0u8; n];
            for slot in m.iter_mut().rev() {
                *slot = (code % k) as u8 + 1;
                code /= k;
            }
            if is_equidistributed(&m, k) {
                out.push(m);
            }
        }
        out
    }

    #[test]
    fn frozen_counts() {
        assert_eq!(enumerate_equidistributed(2, 2).count(), 2);
        assert_eq!(enumerate_equidistributed(4, 2).count(), 6);
        assert_eq!(enumerate_equidistributed(5, 2).count(), 20);
    }

    #[test]
    fn matches_brute_force_in_order() {
        for k in 1..=4 {
            for n in 0..=8 {
                let got: Vec<_> = enumerate_equidistributed(n, k).collect();
                assert_eq!(got, brute(n, k), "n={n} k={k}");
                assert_eq!(equidistributed_count(n, k), BigUint::from(got.len()));
            }
        }
    }

    #[test]
    fn closed_form_when_divisible() {
        for (n, k) in [(6usize, 3usize), (8, 2), (12, 4), (20, 5)] {
            let m = factorial((n / k) as u64);
            let expect = factorial(n as u64) / num_traits::pow(m, k);
            assert_eq!(equidistributed_count(n, k), expect);
        }
    }
}
