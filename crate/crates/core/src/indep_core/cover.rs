use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::rational::{ceil_q, Q};

use super::sets::MapFamily;

/// Minimal number of avoidance boxes `U_φ = ∏_z ({0,…,k} \ {φ(z)})`, `φ ∈ [k]^Z`, covering a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverNumber {
    Exact {
        #[serde(with = "crate::rational::serde_biguint")]
        value: BigUint,
    },
    Bracket {
        #[serde(with = "crate::rational::serde_q")]
        lp_value: Q,
        #[serde(with = "crate::rational::serde_biguint")]
        lower: BigUint,
        #[serde(with = "crate::rational::serde_biguint")]
        upper: BigUint,
    },
    NotCoverable { witness: Vec<u8> },
}

/// Distinct maximal coverage sets, one per surviving `φ`, as bitsets over `s.maps`.
fn coverage_sets(s: &MapFamily) -> Result<Vec<FixedBitSet>> {
    let k = s.k as u64;
    let n = s.ground;
    let total = k
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 22)
        .ok_or_else(|| crate::Error::TooLarge(format!("{k}^{n} avoidance boxes")))?;
    let mut sets: Vec<FixedBitSet> = Vec::new();
    let mut phi = vec![1u8; n];
    for code in 0..total {
        let mut c = code;
        for slot in phi.iter_mut().rev() {
            *slot = (c % k) as u8 + 1;
            c /= k;
        }
        let mut cov = FixedBitSet::with_capacity(s.maps.len());
        for (i, m) in s.maps.iter().enumerate() {
            if m.iter().zip(&phi).all(|(a, b)| a != b) {
                cov.insert(i);
            }
        }
        if !cov.is_clear() {
            sets.push(cov);
        }
    }
    sets.sort_by_key(|b| std::cmp::Reverse(b.count_ones(..)));
    let mut kept: Vec<FixedBitSet> = Vec::new();
    for b in sets {
        if !kept.iter().any(|k| b.is_subset(k)) {
            kept.push(b);
        }
    }
    Ok(kept)
}

fn uncoverable(s: &MapFamily) -> Option<Vec<u8>> {
    // ψ avoids some φ unless k = 1 and ψ uses the colour 1 somewhere
    if s.k == 1 {
        s.maps.iter().find(|m| m.contains(&1)).cloned()
    } else {
        None
    }
}

fn greedy(sets: &[FixedBitSet], universe: usize) -> usize {
    let mut uncovered = FixedBitSet::with_capacity(universe);
    uncovered.insert_range(..);
    let mut used = 0;
    while !uncovered.is_clear() {
        let top = sets.iter().map(|b| b.intersection(&uncovered).count()).max().unwrap_or(0);
        let first = sets
            .iter()
            .find(|b| b.intersection(&uncovered).count() == top)
            .expect("coverable family has covering sets");
        uncovered.difference_with(first);
        used += 1;
    }
    used
}

struct Exact<'a> {
    sets: &'a [FixedBitSet],
    covering: Vec<Vec<usize>>,
    max_size: usize,
    best: usize,
}

impl Exact<'_> {
    fn run(&mut self, uncovered: &FixedBitSet, used: usize) {
        let left = uncovered.count_ones(..);
        if left == 0 {
            self.best = self.best.min(used);
            return;
        }
        if used + left.div_ceil(self.max_size) >= self.best {
            return;
        }
        let pivot = uncovered
            .ones()
            .min_by_key(|&e| (self.covering[e].len(), e))
            .expect("nonempty");
        let mut options = self.covering[pivot].clone();
        options.sort_by_key(|&i| std::cmp::Reverse(self.sets[i].intersection(uncovered).count()));
        for i in options {
            let mut next = uncovered.clone();
            next.difference_with(&self.sets[i]);
            self.run(&next, used + 1);
        }
    }
}

/// Exact cover number by branch-and-bound, regardless of size.
pub fn cover_number_exact(s: &MapFamily) -> Result<CoverNumber> {
    if s.is_empty() {
        return Ok(CoverNumber::Exact { value: BigUint::zero() });
    }
    if let Some(w) = uncoverable(s) {
        return Ok(CoverNumber::NotCoverable { witness: w });
    }
    let sets = coverage_sets(s)?;
    let universe = s.maps.len();
    let mut covering = vec![Vec::new(); universe];
    for (i, b) in sets.iter().enumerate() {
        for e in b.ones() {
            covering[e].push(i);
        }
    }
    let max_size = sets.iter().map(|b| b.count_ones(..)).max().unwrap_or(1);
    let mut ex = Exact { sets: &sets, covering, max_size, best: greedy(&sets, universe) };
    let mut all = FixedBitSet::with_capacity(universe);
    all.insert_range(..);
    ex.run(&all, 0);
    Ok(CoverNumber::Exact { value: BigUint::from(ex.best) })
}

/// LP lower bound (fractional packing optimum) and greedy upper bound.
pub fn cover_bracket(s: &MapFamily) -> Result<CoverNumber> {
    if s.is_empty() {
        return Ok(CoverNumber::Bracket {
            lp_value: Q::zero(),
            lower: BigUint::zero(),
            upper: BigUint::zero(),
        });
    }
    if let Some(w) = uncoverable(s) {
        return Ok(CoverNumber::NotCoverable { witness: w });
    }
    let sets = coverage_sets(s)?;
    let universe = s.maps.len();
    let upper = greedy(&sets, universe);
    // max Σ y_ψ subject to Σ_{ψ ∈ U_φ} y_ψ ≤ 1 for each surviving φ
    let constraints = sets
        .iter()
        .map(|b| {
            let coeffs = (0..universe).map(|e| if b.contains(e) { Q::one() } else { Q::zero() }).collect();
            Constraint::new(coeffs, Relation::Le, Q::one())
        })
        .collect();
    let program = LinearProgram {
        num_vars: universe,
        objective: vec![-Q::one(); universe],
        constraints,
    };
    let lp_value = match lp::solve(&program)? {
        LpOutcome::Optimal { value, .. } => -value,
        other => return Err(invalid(format!("packing relaxation returned {other:?}"))),
    };
    let lower = ceil_q(&lp_value).to_biguint().unwrap_or_default();
    Ok(CoverNumber::Bracket { lp_value, lower, upper: BigUint::from(upper) })
}

/// Exact below `exact_threshold` ground elements, bracketed above it.
pub fn cover_number(s: &MapFamily, exact_threshold: usize) -> Result<CoverNumber> {
    if s.ground <= exact_threshold {
        cover_number_exact(s)
    } else {
        cover_bracket(s)
    }
}
