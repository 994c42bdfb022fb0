use crate::error::{Error, Result};
use crate::par;

use super::sets::{IndexedTupleFamily, PatternMap, SubsetMask};

/// Decides which colour patterns over a set of indices are realized.
pub trait PatternOracle: Sync {
    fn index_size(&self) -> usize;
    fn arity(&self) -> usize;
    /// `None` when every `σ: j → [k]` is realized; otherwise one unrealized `σ` (1-based colours).
    fn unrealized_pattern(&self, j: &[usize]) -> Option<Vec<usize>>;

    fn is_independent_set(&self, j: &[usize]) -> bool {
        self.unrealized_pattern(j).is_none()
    }
}

impl PatternOracle for IndexedTupleFamily {
    fn index_size(&self) -> usize {
        self.index.size
    }

    fn arity(&self) -> usize {
        self.k
    }

    fn unrealized_pattern(&self, j: &[usize]) -> Option<Vec<usize>> {
        let mut sigma = Vec::with_capacity(j.len());
        let start = SubsetMask::full(self.universe.size);
        if descend(self, j, &start, &mut sigma) {
            None
        } else {
            sigma.resize(j.len(), 1);
            Some(sigma)
        }
    }
}

/// Depth-first over colourings; on failure `sigma` holds the failing prefix.
fn descend(f: &IndexedTupleFamily, j: &[usize], cur: &SubsetMask, sigma: &mut Vec<usize>) -> bool {
    let depth = sigma.len();
    if depth == j.len() {
        return !cur.is_empty();
    }
    for c in 0..f.k {
        let next = cur.intersection(&f.tuples[j[depth]][c]);
        sigma.push(c + 1);
        if next.is_empty() || !descend(f, j, &next, sigma) {
            return false;
        }
        sigma.pop();
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceCheck {
    pub independent: bool,
    pub counterexample: Option<PatternMap>,
}

pub fn is_independent(family: &IndexedTupleFamily, j: &SubsetMask) -> Result<IndependenceCheck> {
    if j.ground_size() != family.index.size {
        return Err(Error::SizeMismatch { expected: family.index.size, found: j.ground_size() });
    }
    let idx = j.indices();
    Ok(match family.unrealized_pattern(&idx) {
        None => IndependenceCheck { independent: true, counterexample: None },
        Some(sigma) => IndependenceCheck {
            independent: false,
            counterexample: Some(PatternMap::new(j.clone(), sigma)?),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxIndependent {
    pub set: SubsetMask,
    pub exact: bool,
    pub nodes: u64,
}

struct Search<'a, O: PatternOracle + ?Sized> {
    oracle: &'a O,
    compatible: Vec<Vec<bool>>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<O: PatternOracle + ?Sized> Search<'_, O> {
    fn run(&mut self, current: &mut Vec<usize>, candidates: &[usize]) {
        if current.len() > self.best.len() {
            self.best = current.clone();
        }
        for (pos, &v) in candidates.iter().enumerate() {
            // bound: even taking every remaining candidate cannot beat the incumbent
            if current.len() + candidates.len() - pos <= self.best.len() {
                return;
            }
            if self.nodes >= self.budget {
                self.exhausted = true;
                return;
            }
            self.nodes += 1;
            current.push(v);
            let mut sorted = current.clone();
            sorted.sort_unstable();
            if self.oracle.is_independent_set(&sorted) {
                let rest: Vec<usize> = candidates[pos + 1..]
                    .iter()
                    .copied()
                    .filter(|&w| self.compatible[v][w])
                    .collect();
                self.run(current, &rest);
            }
            current.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Largest independent `J ⊆ f` by branch-and-bound.
///
/// Candidates are ordered by how many pair conflicts they have (fewest
/// first, then by index). Supersets of non-independent sets are never
/// explored. `exact` is false only when the node budget ran out.
pub fn max_independent_subset<O: PatternOracle + ?Sized>(
    oracle: &O,
    f: &SubsetMask,
    budget: u64,
) -> Result<MaxIndependent> {
    let n = oracle.index_size();
    if f.ground_size() != n {
        return Err(Error::SizeMismatch { expected: n, found: f.ground_size() });
    }
    let elems: Vec<usize> = f.indices();
    let singles: Vec<usize> = par::map(&elems, |&i| oracle.is_independent_set(&[i]))
        .into_iter()
        .zip(&elems)
        .filter_map(|(ok, &i)| ok.then_some(i))
        .collect();

    let pairs: Vec<(usize, usize)> = singles
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| singles[a + 1..].iter().map(move |&j| (i, j)))
        .collect();
    let pair_ok = par::map(&pairs, |&(i, j)| oracle.is_independent_set(&[i, j]));
    let mut compatible = vec![vec![false; n]; n];
    for (&(i, j), ok) in pairs.iter().zip(pair_ok) {
        compatible[i][j] = ok;
        compatible[j][i] = ok;
    }
    let mut order = singles.clone();
    let conflicts = |i: usize| singles.iter().filter(|&&j| j != i && !compatible[i][j]).count();
    order.sort_by_key(|&i| (conflicts(i), i));

    let mut search = Search {
        oracle,
        compatible,
        best: Vec::new(),
        nodes: 0,
        budget,
        exhausted: false,
    };
    search.run(&mut Vec::new(), &order);
    let mut best = search.best;
    best.sort_unstable();
    Ok(MaxIndependent {
        set: SubsetMask::from_indices(n, &best)?,
        exact: !search.exhausted,
        nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indep_core::GroundSet;

    /// Y = {0,1}², encoded as 2·a + b; tuple 0 splits on a, tuple 1 on b.
    fn coordinate_split() -> IndexedTupleFamily {
        IndexedTupleFamily::from_indices(
            4,
            2,
            &[vec![vec![0, 1], vec![2, 3]], vec![vec![0, 2], vec![1, 3]]],
        )
        .unwrap()
    }

    fn brute_max(f: &IndexedTupleFamily) -> usize {
        let n = f.index.size;
        (0u32..1 << n)
            .filter(|&m| {
                let j: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
                let k = f.k;
                let total = k.pow(j.len() as u32);
                (0..total).all(|mut code| {
                    let mut cur = SubsetMask::full(f.universe.size);
                    for &i in &j {
                        cur.intersect_with(&f.tuples[i][code % k]);
                        code /= k;
                    }
                    !cur.is_empty()
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn singleton_witness_family_is_independent() {
        let fam = IndexedTupleFamily::from_indices(1, 3, &vec![vec![vec![0]; 3]; 5]).unwrap();
        let all = SubsetMask::full(5);
        assert!(is_independent(&fam, &all).unwrap().independent);
        let best = max_independent_subset(&fam, &all, u64::MAX).unwrap();
        assert_eq!(best.set, all);
        assert!(best.exact);
    }

    #[test]
    fn empty_member_is_reported() {
        let mut t = vec![vec![vec![0, 1], vec![0, 1]]; 3];
        t[1][1] = vec![];
        let fam = IndexedTupleFamily::from_indices(2, 2, &t).unwrap();
        let j = SubsetMask::from_indices(3, &[0, 1]).unwrap();
        let check = is_independent(&fam, &j).unwrap();
        assert!(!check.independent);
        assert_eq!(check.counterexample.unwrap().get(1), Some(2));
        let best = max_independent_subset(&fam, &SubsetMask::full(3), u64::MAX).unwrap();
        assert_eq!(best.set.indices(), vec![0, 2]);
    }

    #[test]
    fn coordinate_split_pair() {
        let fam = coordinate_split();
        assert!(is_independent(&fam, &SubsetMask::full(2)).unwrap().independent);
        let best = max_independent_subset(&fam, &SubsetMask::full(2), u64::MAX).unwrap();
        assert_eq!(best.set.len(), 2);
        assert_eq!(brute_max(&fam), 2);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let fam = coordinate_split();
        assert!(is_independent(&fam, &SubsetMask::full(3)).is_err());
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let fam = IndexedTupleFamily::new(
            GroundSet::new(1),
            2,
            vec![vec![SubsetMask::full(1), SubsetMask::full(1)]; 6],
        )
        .unwrap();
        let r = max_independent_subset(&fam, &SubsetMask::full(6), 2).unwrap();
        assert!(!r.exact);
        assert_eq!(r.set.len(), 2);
    }

    #[test]
    fn random_families_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let universe = rng.gen_range(1..=6);
            let n = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=3);
            let tuples: Vec<Vec<Vec<usize>>> = (0..n)
                .map(|_| {
                    (0..k)
                        .map(|_| (0..universe).filter(|_| rng.gen_bool(0.6)).collect())
                        .collect()
                })
                .collect();
            let fam = IndexedTupleFamily::from_indices(universe, k, &tuples).unwrap();
            let best = max_independent_subset(&fam, &SubsetMask::full(n), u64::MAX).unwrap();
            assert_eq!(best.set.len(), brute_max(&fam));
            assert!(is_independent(&fam, &best.set).unwrap().independent);
        }
    }
}
