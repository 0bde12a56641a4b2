use serde::Serialize;

use crate::error::{Result, TabError};
use crate::hashers::KeyHasher;

/// Final loads after two-choice placement.
#[derive(Debug, Clone, Serialize)]
pub struct TwoChoiceResult {
    pub loads: Vec<u32>,
    pub max_load: u32,
}

/// Places each key into the lighter of two candidate bins, both taken from
/// disjoint bit fields of a single hash evaluation (low bits first). Ties go
/// to the lower-indexed bin.
pub fn two_choice_place<H: KeyHasher>(keys: &[u64], hasher: &H, bins: usize) -> Result<TwoChoiceResult> {
    if bins == 0 || !bins.is_power_of_two() {
        return Err(TabError::Config(format!(
            "bin count {bins} is not a power of two"
        )));
    }
    let bin_bits = bins.trailing_zeros();
    if 2 * bin_bits > hasher.out_bits() {
        return Err(TabError::Config(format!(
            "two bin fields need {} bits, hasher outputs {}",
            2 * bin_bits,
            hasher.out_bits()
        )));
    }
    let mask = bins as u64 - 1;
    let mut loads = vec![0u32; bins];
    for &key in keys {
        let h = hasher.hash(key);
        let b1 = (h & mask) as usize;
        let b2 = ((h >> bin_bits) & mask) as usize;
        let target = match loads[b1].cmp(&loads[b2]) {
            std::cmp::Ordering::Less => b1,
            std::cmp::Ordering::Greater => b2,
            std::cmp::Ordering::Equal => b1.min(b2),
        };
        loads[target] += 1;
    }
    let max_load = loads.iter().copied().max().unwrap_or(0);
    Ok(TwoChoiceResult { loads, max_load })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashers::{ConstantHasher, TrulyRandom};

    #[test]
    fn single_ball() {
        let r = two_choice_place(&[9], &TrulyRandom::new(0, 32), 16).unwrap();
        assert_eq!(r.max_load, 1);
        assert_eq!(r.loads.iter().sum::<u32>(), 1);
    }

    #[test]
    fn forced_two_bins_split_evenly() {
        // Hash value picks bins 0 and 1 for every ball.
        let n = 101u64;
        let bins = 16usize;
        let h = ConstantHasher::new(1 << 4, 32); // b1 = 0, b2 = 1
        let keys: Vec<u64> = (0..n).collect();
        let r = two_choice_place(&keys, &h, bins).unwrap();
        assert_eq!(r.max_load, n.div_ceil(2) as u32);
        assert_eq!(r.loads[0] + r.loads[1], n as u32);
    }

    #[test]
    fn loads_sum_to_balls() {
        let keys: Vec<u64> = (0..5000u64).collect();
        let r = two_choice_place(&keys, &TrulyRandom::new(3, 32), 256).unwrap();
        assert_eq!(r.loads.iter().map(|&l| l as u64).sum::<u64>(), 5000);
        // Idealized hashing keeps two-choice loads very flat.
        assert!(r.max_load <= 30, "max load {}", r.max_load);
    }

    #[test]
    fn rejects_narrow_hasher() {
        assert!(two_choice_place(&[1], &TrulyRandom::new(0, 8), 256).is_err());
        assert!(two_choice_place(&[1], &TrulyRandom::new(0, 32), 100).is_err());
    }
}
