//! Minimum-hash sampling and the statistics built on it: Jaccard similarity
//! estimation (independent repetitions or one k-partitioned evaluation),
//! label-fraction estimation, and threshold sampling with individual
//! probabilities.

use serde::Serialize;

use crate::error::{Result, TabError};
use crate::hashers::KeyHasher;
use crate::keyspace::mask;

/// The minimum-hash element of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinwiseSample {
    pub key: u64,
    pub hash: u64,
    /// How many other set elements shared the minimum hash value (ties are
    /// broken toward the smaller key).
    pub collisions: u64,
}

/// The key of `set` with the smallest hash; ties break to the smaller key.
pub fn minwise_sample<H: KeyHasher>(hasher: &H, set: &[u64]) -> Result<MinwiseSample> {
    let (&first, rest) = set
        .split_first()
        .ok_or_else(|| TabError::Domain("empty set".into()))?;
    let mut best = MinwiseSample {
        key: first,
        hash: hasher.hash(first),
        collisions: 0,
    };
    for &k in rest {
        let h = hasher.hash(k);
        if h < best.hash || (h == best.hash && k < best.key) {
            if h == best.hash {
                best.collisions += 1;
                best.key = k;
            } else {
                best = MinwiseSample {
                    key: k,
                    hash: h,
                    collisions: 0,
                };
            }
        } else if h == best.hash {
            best.collisions += 1;
        }
    }
    Ok(best)
}

/// Fraction of repetitions in which the two sets share their minimum-hash
/// key. `make_hasher` receives the repetition index.
pub fn jaccard_repetition<H, F>(make_hasher: F, reps: u64, a: &[u64], b: &[u64]) -> Result<f64>
where
    H: KeyHasher,
    F: Fn(u64) -> H,
{
    if reps == 0 {
        return Err(TabError::Domain("need at least one repetition".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(TabError::Domain("sets must be non-empty".into()));
    }
    let mut agree = 0u64;
    for rep in 0..reps {
        let h = make_hasher(rep);
        let ma = minwise_sample(&h, a)?;
        let mb = minwise_sample(&h, b)?;
        if ma.key == mb.key {
            agree += 1;
        }
    }
    Ok(agree as f64 / reps as f64)
}

/// Bin index (high `lg k` bits) and local value (remaining low bits) of one
/// hash evaluation.
#[inline]
fn split_bin<H: KeyHasher>(hasher: &H, k_bits: u32, x: u64) -> (usize, u64) {
    let h = hasher.hash(x);
    let local_bits = hasher.out_bits() - k_bits;
    let bin = if k_bits == 0 {
        0
    } else {
        (h >> local_bits) as usize
    };
    (bin, h & mask(local_bits))
}

/// One hasher, `k` bins: per bin the item with the smallest local hash.
/// A sample without replacement since each item lands in exactly one bin.
/// Empty bins yield `None`.
pub fn kpartition_sample<H: KeyHasher>(
    hasher: &H,
    items: &[u64],
    k: usize,
) -> Result<Vec<Option<MinwiseSample>>> {
    if k == 0 || !k.is_power_of_two() {
        return Err(TabError::Domain(format!("k = {k} is not a power of two")));
    }
    let k_bits = k.trailing_zeros();
    if k_bits >= hasher.out_bits() && k > 1 {
        return Err(TabError::Config(format!(
            "k = {k} leaves no local bits in a {}-bit hash",
            hasher.out_bits()
        )));
    }
    let mut bins: Vec<Option<MinwiseSample>> = vec![None; k];
    for &x in items {
        let (bin, local) = split_bin(hasher, k_bits, x);
        let slot = &mut bins[bin];
        match slot {
            None => {
                *slot = Some(MinwiseSample {
                    key: x,
                    hash: local,
                    collisions: 0,
                })
            }
            Some(cur) => {
                if local < cur.hash || (local == cur.hash && x < cur.key) {
                    if local == cur.hash {
                        cur.collisions += 1;
                        cur.key = x;
                    } else {
                        *cur = MinwiseSample {
                            key: x,
                            hash: local,
                            collisions: 0,
                        };
                    }
                } else if local == cur.hash {
                    cur.collisions += 1;
                }
            }
        }
    }
    Ok(bins)
}

/// One-evaluation Jaccard estimate: the fraction of bins, non-empty for both
/// sets, whose bottom keys agree.
pub fn jaccard_kpartition<H: KeyHasher>(hasher: &H, a: &[u64], b: &[u64], k: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(TabError::Domain("sets must be non-empty".into()));
    }
    let bins_a = kpartition_sample(hasher, a, k)?;
    let bins_b = kpartition_sample(hasher, b, k)?;
    let mut both = 0u64;
    let mut agree = 0u64;
    for (sa, sb) in bins_a.iter().zip(&bins_b) {
        if let (Some(ma), Some(mb)) = (sa, sb) {
            both += 1;
            if ma.key == mb.key {
                agree += 1;
            }
        }
    }
    if both == 0 {
        return Err(TabError::Domain(
            "no bin was populated by both sets; lower k".into(),
        ));
    }
    Ok(agree as f64 / both as f64)
}

/// Estimates the fraction of items with `label = true` by sampling the
/// bottom item of each of `k` bins.
pub fn kpartition_fraction<H: KeyHasher>(
    hasher: &H,
    items: &[(u64, bool)],
    k: usize,
) -> Result<f64> {
    if items.is_empty() {
        return Err(TabError::Domain("items must be non-empty".into()));
    }
    let keys: Vec<u64> = items.iter().map(|&(x, _)| x).collect();
    let bins = kpartition_sample(hasher, &keys, k)?;
    let lookup: std::collections::HashMap<u64, bool> = items.iter().copied().collect();
    let mut sampled = 0u64;
    let mut red = 0u64;
    for s in bins.into_iter().flatten() {
        sampled += 1;
        if lookup[&s.key] {
            red += 1;
        }
    }
    debug_assert!(sampled > 0, "non-empty items fill at least one bin");
    Ok(red as f64 / sampled as f64)
}

/// Samples item `x` iff `h(x) < ceil(p_x * m)` where `m = 2^out_bits`; the
/// effective inclusion probability is `ceil(p_x * m) / m`.
pub fn threshold_sample<H: KeyHasher>(hasher: &H, items: &[(u64, f64)]) -> Result<Vec<u64>> {
    let m = (1u128) << hasher.out_bits();
    let mut out = Vec::new();
    for &(x, p) in items {
        if !(0.0..=1.0).contains(&p) {
            return Err(TabError::Domain(format!(
                "sampling probability {p} for key {x:#x} outside [0, 1]"
            )));
        }
        let threshold = (p * m as f64).ceil() as u128;
        if (hasher.hash(x) as u128) < threshold {
            out.push(x);
        }
    }
    Ok(out)
}

/// The effective per-item probability `ceil(p * m) / m` the sampler realizes.
pub fn effective_probability(p: f64, out_bits: u32) -> f64 {
    let m = (1u128 << out_bits) as f64;
    (p * m).ceil() / m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashers::{ConstantHasher, MultShiftHasher, TrulyRandom};

    #[test]
    fn singleton_and_tie_break() {
        let h = TrulyRandom::new(1, 32);
        let s = minwise_sample(&h, &[42]).unwrap();
        assert_eq!(s.key, 42);
        assert_eq!(s.hash, h.hash(42));

        let degenerate = ConstantHasher::new(0, 32);
        let s = minwise_sample(&degenerate, &[9, 3, 7]).unwrap();
        assert_eq!(s.key, 3);
        assert_eq!(s.collisions, 2);
        assert!(minwise_sample(&degenerate, &[]).is_err());
    }

    #[test]
    fn deterministic_given_hasher_and_set() {
        let h = TrulyRandom::new(5, 32);
        let set: Vec<u64> = (100..200).collect();
        assert_eq!(minwise_sample(&h, &set).unwrap(), minwise_sample(&h, &set).unwrap());
    }

    #[test]
    fn jaccard_equal_sets_is_one() {
        let a: Vec<u64> = (0..50).collect();
        let est = jaccard_repetition(|r| TrulyRandom::new(r, 32), 64, &a, &a).unwrap();
        assert_eq!(est, 1.0);
        let est = jaccard_kpartition(&TrulyRandom::new(8, 32), &a, &a, 8).unwrap();
        assert_eq!(est, 1.0);
    }

    #[test]
    fn jaccard_disjoint_sets_is_zero_without_collisions() {
        // Identity hashing: injective, no hash collisions possible.
        let id = MultShiftHasher::new(1, 0, 64).unwrap();
        let a: Vec<u64> = (0..50).collect();
        let b: Vec<u64> = (100..150).collect();
        let est = jaccard_repetition(|_| MultShiftHasher::new(1, 0, 64).unwrap(), 16, &a, &b)
            .unwrap();
        assert_eq!(est, 0.0);
        let est = jaccard_kpartition(&id, &a, &b, 4).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn jaccard_half_overlap_concentrates() {
        // |A ∩ B| / |A ∪ B| = 0.5 with |A ∪ B| = 2000, 512 repetitions:
        // within ±0.08 in at least 95 of 100 runs.
        let union: Vec<u64> = (0..2000u64).map(|i| i * 2654435761 % (1 << 30)).collect();
        let a: Vec<u64> = union[..1500].to_vec();
        let b: Vec<u64> = union[500..].to_vec();
        let mut good = 0;
        for run in 0..100u64 {
            let est = jaccard_repetition(
                |r| TrulyRandom::new(run * 100_000 + r, 32),
                512,
                &a,
                &b,
            )
            .unwrap();
            if (est - 0.5).abs() <= 0.08 {
                good += 1;
            }
        }
        assert!(good >= 95, "only {good} runs inside the band");
    }

    #[test]
    fn kpartition_bins_and_sample_without_replacement() {
        let h = TrulyRandom::new(2, 32);
        let items: Vec<u64> = (0..1000).collect();
        let bins = kpartition_sample(&h, &items, 64).unwrap();
        let mut keys: Vec<u64> = bins.iter().flatten().map(|s| s.key).collect();
        let before = keys.len();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), before, "sampled keys must be distinct");
        // Bin index must come from the high bits.
        for (bin, s) in bins.iter().enumerate() {
            if let Some(s) = s {
                assert_eq!((h.hash(s.key) >> (32 - 6)) as usize, bin);
            }
        }
    }

    #[test]
    fn kpartition_fraction_examples() {
        let h = TrulyRandom::new(3, 32);
        let all_red: Vec<(u64, bool)> = (0..500).map(|x| (x, true)).collect();
        assert_eq!(kpartition_fraction(&h, &all_red, 16).unwrap(), 1.0);

        // k = 1 degenerates to the single minwise sample's label.
        let items: Vec<(u64, bool)> = (0..500).map(|x| (x, x % 3 == 0)).collect();
        let keys: Vec<u64> = items.iter().map(|&(x, _)| x).collect();
        let top = minwise_sample(&h, &keys).unwrap();
        let frac = kpartition_fraction(&h, &items, 1).unwrap();
        assert_eq!(frac, if top.key % 3 == 0 { 1.0 } else { 0.0 });
    }

    #[test]
    fn threshold_degenerate_probabilities() {
        let h = TrulyRandom::new(4, 32);
        let all: Vec<(u64, f64)> = (0..200).map(|x| (x, 1.0)).collect();
        assert_eq!(threshold_sample(&h, &all).unwrap().len(), 200);
        let none: Vec<(u64, f64)> = (0..200).map(|x| (x, 0.0)).collect();
        assert!(threshold_sample(&h, &none).unwrap().is_empty());
        assert!(threshold_sample(&h, &[(1, 1.5)]).is_err());
    }

    #[test]
    fn threshold_rounds_up_to_effective_probability() {
        // A 6-bit identity hash makes the inclusion set exact:
        // x is sampled iff x < ceil(p * 64).
        struct Low6;
        impl KeyHasher for Low6 {
            fn hash(&self, x: u64) -> u64 {
                x & 63
            }
            fn out_bits(&self) -> u32 {
                6
            }
        }
        let items: Vec<(u64, f64)> = (0..64).map(|x| (x, 0.3)).collect();
        let sampled = threshold_sample(&Low6, &items).unwrap();
        let expect = (0.3f64 * 64.0).ceil() as usize; // 20 of 64
        assert_eq!(sampled.len(), expect);
        assert_eq!(effective_probability(0.3, 6), expect as f64 / 64.0);
    }
}
