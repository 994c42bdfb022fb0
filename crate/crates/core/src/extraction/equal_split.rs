use crate::error::{invalid, Result};
use crate::rational::q;

use super::adversary::{mask_of_indices, SetAdversary};

/// The colour order `j_1, …, j_k` picked for `ψ` by the block-argmax rule.
///
/// `b_{j,i}` is the `(i·n/k²)`-th smallest point of colour `j`; step `l`
/// takes the unused colour with the largest `b_{j,l}`, smaller `j` on ties.
pub fn equal_split_order(psi: &[u8], k: usize) -> Vec<u8> {
    let n = psi.len();
    let block = n / (k * k);
    let classes: Vec<Vec<usize>> =
        (1..=k).map(|j| (0..n).filter(|&z| psi[z] as usize == j).collect()).collect();
    let mut used = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for l in 1..=k {
        let mut best: Option<(usize, usize)> = None;
        for j in 0..k {
            if used[j] {
                continue;
            }
            let b = classes[j][l * block - 1];
            if best.map_or(true, |(_, bb)| b > bb) {
                best = Some((j, b));
            }
        }
        let (j, _) = best.expect("k colours for k steps");
        used[j] = true;
        order.push(j as u8 + 1);
    }
    order
}

/// Worst-case set adversary with `|Z_ψ| = (k−1)n/k`: step `l` removes the
/// `l`-th block of `n/k²` points from colour `j_l`.
pub fn equal_split_adversary(k: usize, n: usize) -> Result<SetAdversary> {
    if k < 1 || n == 0 || n % (k * k) != 0 {
        return Err(invalid(format!("equal split needs k² | n, got k = {k}, n = {n}")));
    }
    let block = n / (k * k);
    SetAdversary::from_fn(n, k, Some(q(k as i64 - 1, k as i64)), |psi| {
        let order = equal_split_order(psi, k);
        let mut removed = Vec::new();
        for (l, &j) in order.iter().enumerate() {
            let class: Vec<usize> = (0..n).filter(|&z| psi[z] == j).collect();
            removed.extend_from_slice(&class[l * block..(l + 1) * block]);
        }
        let all = mask_of_indices(0..n);
        all & !mask_of_indices(removed)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_are_exact() {
        for (k, n) in [(2, 4), (2, 8), (3, 9)] {
            let adv = equal_split_adversary(k, n).unwrap();
            for (psi, m) in adv.maps().iter().zip(adv.masks()) {
                assert_eq!(m.count_ones() as usize, (k - 1) * n / k);
                for j in 1..=k as u8 {
                    let class = (0..n).filter(|&z| psi[z] == j).count();
                    let kept = (0..n).filter(|&z| psi[z] == j && m >> z & 1 == 1).count();
                    assert_eq!(kept * k, (k - 1) * class);
                }
            }
        }
    }

    #[test]
    fn no_increasing_chain_through_the_order() {
        for (k, n) in [(2, 4), (2, 8), (3, 9)] {
            let adv = equal_split_adversary(k, n).unwrap();
            for (psi, m) in adv.maps().iter().zip(adv.masks()) {
                let order = equal_split_order(psi, k);
                // longest prefix of the order realisable by an increasing chain in Z_ψ
                let mut step = 0;
                for (z, &colour) in psi.iter().enumerate() {
                    if step < k && m >> z & 1 == 1 && colour == order[step] {
                        step += 1;
                    }
                }
                assert!(step < k, "ψ = {psi:?}");
            }
        }
    }

    #[test]
    fn frozen_small_case() {
        let adv = equal_split_adversary(2, 4).unwrap();
        assert_eq!(adv.maps().len(), 6);
        // ψ = 1122: b_{1,1} = 0, b_{2,1} = 2, so colour 2 goes first and loses z = 2;
        // colour 1 then loses its second point z = 1
        assert_eq!(adv.mask_of(&[1, 1, 2, 2]), Some(0b1001));
        assert_eq!(equal_split_order(&[1, 1, 2, 2], 2), vec![2, 1]);
    }

    #[test]
    fn rejects_indivisible() {
        assert!(equal_split_adversary(2, 6).is_err());
        assert!(equal_split_adversary(3, 6).is_err());
    }
}
