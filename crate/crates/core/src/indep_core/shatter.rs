use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use itertools::Itertools;

use crate::error::{invalid, Result};
use crate::par;

use super::sets::{MapFamily, SubsetMask};

/// Restrictions of the maps in `s` to `j` (in the order of `j`).
pub fn trace(s: &MapFamily, j: &[usize]) -> BTreeSet<Vec<u8>> {
    s.maps.iter().map(|m| j.iter().map(|&i| m[i]).collect()).collect()
}

/// Whether the trace on `j` contains all of `[k]^j`; the symbol 0 is never required.
pub fn is_shattered(s: &MapFamily, j: &[usize]) -> bool {
    let k = s.k;
    let Some(total) = k.checked_pow(j.len() as u32) else { return false };
    if total > s.maps.len() {
        return false;
    }
    let mut seen = FixedBitSet::with_capacity(total);
    let mut hits = 0usize;
    for m in &s.maps {
        let mut code = 0usize;
        let mut valid = true;
        for &i in j {
            let v = m[i] as usize;
            if v == 0 {
                valid = false;
                break;
            }
            code = code * k + (v - 1);
        }
        if valid && !seen.put(code) {
            hits += 1;
            if hits == total {
                return true;
            }
        }
    }
    hits == total
}

/// A maximum-cardinality shattered set, lexicographically first among ties.
pub fn largest_shattered(s: &MapFamily) -> Result<SubsetMask> {
    if s.is_empty() {
        return Err(invalid("largest_shattered needs a nonempty family"));
    }
    let n = s.ground;
    let mut cap = 0usize;
    if s.k >= 2 {
        while cap < n && s.k.pow(cap as u32 + 1) <= s.maps.len() {
            cap += 1;
        }
    } else {
        cap = n;
    }
    for d in (1..=cap).rev() {
        let candidates: Vec<Vec<usize>> = (0..n).combinations(d).collect();
        if let Some(j) = par::find_first(&candidates, |j| is_shattered(s, j).then(|| j.clone())) {
            return SubsetMask::from_indices(n, &j);
        }
    }
    Ok(SubsetMask::empty(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_family_shatters_everything() {
        let s = MapFamily::complete(4, 2).unwrap();
        assert_eq!(largest_shattered(&s).unwrap().len(), 4);
        let s3 = MapFamily::complete(3, 3).unwrap();
        assert_eq!(largest_shattered(&s3).unwrap().len(), 3);
    }

    #[test]
    fn constant_maps_shatter_singletons_only() {
        for k in 2..=4u8 {
            let maps = (1..=k).map(|c| vec![c; 5]).collect();
            let s = MapFamily::new(5, k as usize, false, maps).unwrap();
            assert_eq!(largest_shattered(&s).unwrap().indices(), vec![0]);
        }
    }

    #[test]
    fn every_five_subset_of_the_cube_shatters_a_pair() {
        let cube = MapFamily::complete(3, 2).unwrap();
        let mut min = usize::MAX;
        for pick in (0..8).combinations(5) {
            let s = MapFamily::new(3, 2, false, pick.iter().map(|&i| cube.maps[i].clone()).collect())
                .unwrap();
            min = min.min(largest_shattered(&s).unwrap().len());
        }
        assert_eq!(min, 2);
    }

    #[test]
    fn zero_symbol_is_never_required() {
        let s = MapFamily::new(2, 2, true, vec![vec![1, 0], vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(largest_shattered(&s).unwrap().indices(), vec![0]);
        assert!(!is_shattered(&s, &[1]));
    }

    #[test]
    fn arity_one_shatters_whole_ground() {
        let s = MapFamily::new(3, 1, false, vec![vec![1, 1, 1]]).unwrap();
        assert_eq!(largest_shattered(&s).unwrap().len(), 3);
        let z = MapFamily::new(3, 1, true, vec![vec![1, 0, 1]]).unwrap();
        assert_eq!(largest_shattered(&z).unwrap().indices(), vec![0, 2]);
    }
}
