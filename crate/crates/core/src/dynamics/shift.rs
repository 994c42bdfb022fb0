use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::indep_core::{max_independent_subset, PatternOracle, SubsetMask};

pub type Symbol = u8;

/// Union of full shifts over ℤ, one per sub-alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftSpec {
    pub alphabet: Vec<Symbol>,
    pub components: Vec<Vec<Symbol>>,
}

impl SubshiftSpec {
    pub fn new(alphabet: Vec<Symbol>, components: Vec<Vec<Symbol>>) -> Result<Self> {
        let mut alphabet = alphabet;
        alphabet.sort_unstable();
        alphabet.dedup();
        if components.is_empty() {
            return Err(invalid("a subshift needs at least one component"));
        }
        let mut comps = Vec::with_capacity(components.len());
        for mut c in components {
            c.sort_unstable();
            c.dedup();
            if c.is_empty() || c.iter().any(|s| alphabet.binary_search(s).is_err()) {
                return Err(invalid(format!("component {c:?} empty or outside the alphabet")));
            }
            comps.push(c);
        }
        Ok(Self { alphabet, components: comps })
    }

    /// `{0,1}^ℤ ∪ {1,2}^ℤ`.
    pub fn two_component() -> Self {
        Self::new(vec![0, 1, 2], vec![vec![0, 1], vec![1, 2]]).expect("valid subshift")
    }

    fn component_mask(&self, symbol: Symbol) -> u64 {
        self.components.iter().enumerate().filter(|(_, c)| c.contains(&symbol)).fold(0, |m, (i, _)| m | 1 << i)
    }

    fn full_mask(&self) -> u64 {
        if self.components.len() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.components.len()) - 1
        }
    }

    pub fn contains(&self, point: &PatternPoint) -> bool {
        self.components.iter().any(|c| c.contains(&point.default) && point.core.values().all(|s| c.contains(s)))
    }

    fn check_symbols<'a>(&self, symbols: impl IntoIterator<Item = &'a Symbol>) -> Result<()> {
        for s in symbols {
            if self.alphabet.binary_search(s).is_err() {
                return Err(invalid(format!("symbol {s} outside the alphabet")));
            }
        }
        Ok(())
    }
}

/// Points whose coordinates are prescribed at finitely many positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CylinderSet {
    pub constraints: BTreeMap<i64, Symbol>,
}

impl CylinderSet {
    pub fn new(constraints: impl IntoIterator<Item = (i64, Symbol)>) -> Self {
        Self { constraints: constraints.into_iter().collect() }
    }

    /// `{x : x(0) = symbol}`.
    pub fn at_origin(symbol: Symbol) -> Self {
        Self::new([(0, symbol)])
    }

    /// Constraints of `s^{-1}C = {x : sx ∈ C}`.
    pub fn pullback(&self, s: i64) -> CylinderSet {
        Self::new(self.constraints.iter().map(|(&p, &v)| (p + s, v)))
    }

    pub fn contains(&self, x: &PatternPoint) -> bool {
        self.constraints.iter().all(|(&p, &v)| x.at(p) == v)
    }
}

/// A point with finitely many coordinates differing from a constant background.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternPoint {
    pub core: BTreeMap<i64, Symbol>,
    #[serde(rename = "defaultSymbol")]
    pub default: Symbol,
}

impl PatternPoint {
    pub fn new(core: impl IntoIterator<Item = (i64, Symbol)>, default: Symbol) -> Self {
        let core = core.into_iter().filter(|&(_, v)| v != default).collect();
        Self { core, default }
    }

    pub fn constant(symbol: Symbol) -> Self {
        Self::new([], symbol)
    }

    pub fn at(&self, p: i64) -> Symbol {
        self.core.get(&p).copied().unwrap_or(self.default)
    }

    /// `sx`, with `(sx)(t) = x(t + s)`.
    pub fn shift(&self, s: i64) -> PatternPoint {
        Self { core: self.core.iter().map(|(&p, &v)| (p - s, v)).collect(), default: self.default }
    }
}

/// Result of merging shifted cylinder constraints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SatOutcome {
    Witness { point: PatternPoint },
    Clash { position: i64, first: Symbol, second: Symbol },
    NoComponent { symbols: Vec<Symbol> },
}

impl SatOutcome {
    pub fn witness(&self) -> Option<&PatternPoint> {
        match self {
            SatOutcome::Witness { point } => Some(point),
            _ => None,
        }
    }
}

/// Decides whether `⋂ s^{-1}C_s` meets the subshift, returning a witness point when it does.
///
/// The witness lives in the first component holding every required symbol; its background is
/// the symbol of that component shared by the most components, ties going to the smaller symbol.
pub fn satisfiable(subshift: &SubshiftSpec, constraints: &[(i64, CylinderSet)]) -> Result<SatOutcome> {
    let mut merged: BTreeMap<i64, Symbol> = BTreeMap::new();
    for (s, c) in constraints {
        subshift.check_symbols(c.constraints.values())?;
        for (&p, &v) in &c.constraints {
            match merged.insert(p + s, v) {
                Some(old) if old != v => return Ok(SatOutcome::Clash { position: p + s, first: old, second: v }),
                _ => {}
            }
        }
    }
    let symbols: BTreeSet<Symbol> = merged.values().copied().collect();
    let Some(comp) = subshift.components.iter().find(|c| symbols.iter().all(|s| c.contains(s))) else {
        return Ok(SatOutcome::NoComponent { symbols: symbols.into_iter().collect() });
    };
    let share = |s: &Symbol| subshift.components.iter().filter(|c| c.contains(s)).count();
    let default = *comp.iter().max_by_key(|s| (share(s), std::cmp::Reverse(**s))).expect("nonempty component");
    Ok(SatOutcome::Witness { point: PatternPoint::new(merged, default) })
}

/// Independence oracle for a tuple of cylinders at the positions `0..n`.
///
/// Patterns are explored depth-first; the state after fixing a prefix is the part of the merged
/// constraint map later positions can still touch, plus the set of components still possible,
/// so equal states are decided once.
pub struct CylinderOracle<'a> {
    subshift: &'a SubshiftSpec,
    tuple: &'a [CylinderSet],
    n: usize,
}

impl<'a> CylinderOracle<'a> {
    pub fn new(subshift: &'a SubshiftSpec, tuple: &'a [CylinderSet], n: usize) -> Result<Self> {
        if tuple.is_empty() {
            return Err(invalid("empty tuple of cylinders"));
        }
        if subshift.components.len() > 64 {
            return Err(invalid("at most 64 components supported"));
        }
        for c in tuple {
            subshift.check_symbols(c.constraints.values())?;
        }
        Ok(Self { subshift, tuple, n })
    }
}

type State = (usize, Vec<(i64, Symbol)>, u64);

struct Walk<'a, 'b> {
    oracle: &'b CylinderOracle<'a>,
    positions: &'b [i64],
    reach: Vec<BTreeSet<i64>>,
    memo: HashMap<State, Option<Vec<usize>>>,
}

impl Walk<'_, '_> {
    /// `None` if every completion from this state is realised, else a failing suffix.
    fn run(&mut self, i: usize, map: &BTreeMap<i64, Symbol>, mask: u64) -> Option<Vec<usize>> {
        if i == self.positions.len() {
            return None;
        }
        let kept: Vec<(i64, Symbol)> =
            map.iter().filter(|(p, _)| self.reach[i].contains(p)).map(|(&p, &v)| (p, v)).collect();
        let key = (i, kept.clone(), mask);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let base: BTreeMap<i64, Symbol> = kept.into_iter().collect();
        let mut result = None;
        for (c, cyl) in self.oracle.tuple.iter().enumerate() {
            let mut next = base.clone();
            let mut m = mask;
            let mut ok = true;
            for (&p, &v) in &cyl.constraints {
                let at = p + self.positions[i];
                if next.insert(at, v).is_some_and(|old| old != v) {
                    ok = false;
                    break;
                }
                m &= self.oracle.subshift.component_mask(v);
            }
            if !ok || m == 0 {
                result = Some(vec![c + 1]);
                break;
            }
            if let Some(mut tail) = self.run(i + 1, &next, m) {
                tail.insert(0, c + 1);
                result = Some(tail);
                break;
            }
        }
        self.memo.insert(key, result.clone());
        result
    }
}

impl PatternOracle for CylinderOracle<'_> {
    fn index_size(&self) -> usize {
        self.n
    }

    fn arity(&self) -> usize {
        self.tuple.len()
    }

    fn unrealized_pattern(&self, j: &[usize]) -> Option<Vec<usize>> {
        let positions: Vec<i64> = j.iter().map(|&i| i as i64).collect();
        let offsets: BTreeSet<i64> = self.tuple.iter().flat_map(|c| c.constraints.keys().copied()).collect();
        let mut reach = vec![BTreeSet::new(); positions.len() + 1];
        for i in (0..positions.len()).rev() {
            let mut r = reach[i + 1].clone();
            r.extend(offsets.iter().map(|o| o + positions[i]));
            reach[i] = r;
        }
        let mut walk = Walk { oracle: self, positions: &positions, reach, memo: HashMap::new() };
        let mut sigma = walk.run(0, &BTreeMap::new(), self.subshift.full_mask())?;
        sigma.resize(j.len(), 1);
        Some(sigma)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntervalDensity {
    pub n: usize,
    pub phi: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub density: crate::rational::Q,
    pub witness: Vec<usize>,
    pub exact: bool,
}

pub const DENSITY_BUDGET: u64 = 2_000_000;

/// Largest independence set inside `[0, n)` for a tuple of cylinders, and its density.
pub fn interval_independence_density(
    subshift: &SubshiftSpec,
    tuple: &[CylinderSet],
    n: usize,
    budget: u64,
) -> Result<IntervalDensity> {
    if n == 0 {
        return Err(invalid("interval length must be at least 1"));
    }
    let oracle = CylinderOracle::new(subshift, tuple, n)?;
    let best = max_independent_subset(&oracle, &SubsetMask::full(n), budget)?;
    let phi = best.set.len();
    Ok(IntervalDensity {
        n,
        phi,
        density: crate::rational::q(phi as i64, n as i64),
        witness: best.set.indices(),
        exact: best.exact,
    })
}
