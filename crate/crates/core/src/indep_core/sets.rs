use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize) -> Self {
        Self { size, labels: None }
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        Self { size: labels.len(), labels: Some(labels) }
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }
}

/// A subset of `{0, …, size-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    size: usize,
    bits: FixedBitSet,
}

impl SubsetMask {
    pub fn empty(size: usize) -> Self {
        Self { size, bits: FixedBitSet::with_capacity(size) }
    }

    pub fn full(size: usize) -> Self {
        let mut m = Self::empty(size);
        m.bits.insert_range(..);
        m
    }

    pub fn from_indices(size: usize, indices: &[usize]) -> Result<Self> {
        let mut m = Self::empty(size);
        for &i in indices {
            if i >= size {
                return Err(invalid(format!("index {i} outside ground set of size {size}")));
            }
            m.bits.insert(i);
        }
        Ok(m)
    }

    pub fn from_u64(size: usize, word: u64) -> Self {
        let mut m = Self::empty(size);
        for i in 0..size.min(64) {
            if word >> i & 1 == 1 {
                m.bits.insert(i);
            }
        }
        m
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.size > 64 {
            return None;
        }
        Some(self.bits.ones().fold(0u64, |acc, i| acc | 1 << i))
    }

    pub fn ground_size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.size && self.bits.contains(i)
    }

    pub fn insert(&mut self, i: usize) {
        self.bits.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.bits.set(i, false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn is_subset(&self, other: &SubsetMask) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersect_with(&mut self, other: &SubsetMask) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn intersection(&self, other: &SubsetMask) -> SubsetMask {
        let mut m = self.clone();
        m.intersect_with(other);
        m
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

/// A colouring `σ: J → [k]`, colours stored 1-based in the order of `J`'s indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternMap {
    pub domain: SubsetMask,
    pub values: Vec<usize>,
}

impl PatternMap {
    pub fn new(domain: SubsetMask, values: Vec<usize>) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(Error::SizeMismatch { expected: domain.len(), found: values.len() });
        }
        if values.contains(&0) {
            return Err(invalid("pattern colours are 1-based"));
        }
        Ok(Self { domain, values })
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.domain.indices().iter().position(|&j| j == i).map(|p| self.values[p])
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.domain.indices().into_iter().zip(self.values.iter().copied()).collect()
    }
}

/// A finite set of maps `Z → [k]` (or `Z → {0,…,k}`), kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFamily {
    pub ground: usize,
    pub k: usize,
    #[serde(rename = "alphabetIncludesZero")]
    pub includes_zero: bool,
    pub maps: Vec<Vec<u8>>,
}

impl MapFamily {
    pub fn new(ground: usize, k: usize, includes_zero: bool, maps: Vec<Vec<u8>>) -> Result<Self> {
        if k == 0 || k > u8::MAX as usize {
            return Err(invalid(format!("arity {k} out of range")));
        }
        let lo = if includes_zero { 0 } else { 1 };
        for m in &maps {
            if m.len() != ground {
                return Err(Error::SizeMismatch { expected: ground, found: m.len() });
            }
            if m.iter().any(|&v| (v as usize) < lo || v as usize > k) {
                return Err(invalid(format!("map {m:?} leaves the alphabet")));
            }
        }
        let maps: BTreeSet<Vec<u8>> = maps.into_iter().collect();
        Ok(Self { ground, k, includes_zero, maps: maps.into_iter().collect() })
    }

    /// All of `[k]^Z`.
    pub fn complete(ground: usize, k: usize) -> Result<Self> {
        let total = (k as u64).checked_pow(ground as u32).ok_or_else(|| {
            Error::TooLarge(format!("{k}^{ground} maps"))
        })?;
        let maps = (0..total)
            .map(|mut code| {
                let mut m = vec![0u8; ground];
                for slot in m.iter_mut().rev() {
                    *slot = (code % k as u64) as u8 + 1;
                    code /= k as u64;
                }
                m
            })
            .collect();
        Self::new(ground, k, false, maps)
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn is_subfamily_of(&self, other: &MapFamily) -> bool {
        self.maps.iter().all(|m| other.maps.binary_search(m).is_ok())
    }
}

/// A family of k-tuples `(A_{i,1}, …, A_{i,k})`, `i` in the index set, of subsets of a universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedTupleFamily {
    pub universe: GroundSet,
    pub k: usize,
    pub index: GroundSet,
    pub tuples: Vec<Vec<SubsetMask>>,
}

#[derive(Serialize, Deserialize)]
struct TupleFamilyJson {
    universe: usize,
    k: usize,
    index: usize,
    tuples: Vec<Vec<Vec<usize>>>,
}

impl IndexedTupleFamily {
    pub fn new(universe: GroundSet, k: usize, tuples: Vec<Vec<SubsetMask>>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("arity must be at least 1"));
        }
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != k {
                return Err(invalid(format!("tuple {i} has {} members, expected {k}", t.len())));
            }
            if let Some(m) = t.iter().find(|m| m.ground_size() != universe.size) {
                return Err(Error::SizeMismatch { expected: universe.size, found: m.ground_size() });
            }
        }
        let index = GroundSet::new(tuples.len());
        Ok(Self { universe, k, index, tuples })
    }

    pub fn from_indices(universe: usize, k: usize, tuples: &[Vec<Vec<usize>>]) -> Result<Self> {
        let masks = tuples
            .iter()
            .map(|t| t.iter().map(|m| SubsetMask::from_indices(universe, m)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Self::new(GroundSet::new(universe), k, masks)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = TupleFamilyJson {
            universe: self.universe.size,
            k: self.k,
            index: self.index.size,
            tuples: self.tuples.iter().map(|t| t.iter().map(|m| m.indices()).collect()).collect(),
        };
        serde_json::to_value(j).expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: TupleFamilyJson =
            serde_json::from_value(v.clone()).map_err(|e| invalid(e.to_string()))?;
        let fam = Self::from_indices(j.universe, j.k, &j.tuples)?;
        if fam.index.size != j.index {
            return Err(Error::SizeMismatch { expected: j.index, found: fam.index.size });
        }
        Ok(fam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let m = SubsetMask::from_indices(10, &[1, 4, 9]).unwrap();
        assert_eq!(m.indices(), vec![1, 4, 9]);
        assert_eq!(SubsetMask::from_u64(10, m.to_u64().unwrap()), m);
        assert!(SubsetMask::from_indices(3, &[3]).is_err());
        assert_eq!(SubsetMask::full(5).len(), 5);
    }

    #[test]
    fn map_family_dedups_and_checks_alphabet() {
        let f = MapFamily::new(2, 2, false, vec![vec![1, 2], vec![1, 2], vec![2, 2]]).unwrap();
        assert_eq!(f.len(), 2);
        assert!(MapFamily::new(2, 2, false, vec![vec![0, 1]]).is_err());
        assert!(MapFamily::new(2, 2, true, vec![vec![0, 1]]).is_ok());
        assert_eq!(MapFamily::complete(3, 2).unwrap().len(), 8);
    }

    #[test]
    fn tuple_family_json_round_trip() {
        let fam = IndexedTupleFamily::from_indices(4, 2, &[vec![vec![0, 1], vec![2, 3]]]).unwrap();
        assert_eq!(IndexedTupleFamily::from_json(&fam.to_json()).unwrap(), fam);
    }
}
