use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Result, TabError};
use crate::hashers::KeyHasher;

/// A goodness-of-fit result against the uniform joint distribution.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    pub trials: u64,
    pub cells: u64,
}

/// Monte-Carlo companion to exact enumeration for geometries too large to
/// enumerate: hashes `k` fixed distinct keys under `trials` independently
/// seeded hashers and tests the empirical joint distribution against uniform
/// over `(2^out_bits)^k` cells.
///
/// The factory receives the trial index and must return a fresh hasher;
/// the caller controls seeding.
pub fn independence_chi_square<H, F>(
    factory: F,
    keys: &[u64],
    out_bits: u32,
    trials: u64,
) -> Result<ChiSquareReport>
where
    H: KeyHasher,
    F: Fn(u64) -> H,
{
    if keys.is_empty() || keys.len() > 4 {
        return Err(TabError::Domain(format!(
            "need 1..=4 fixed keys, got {}",
            keys.len()
        )));
    }
    if trials < 10_000 {
        return Err(TabError::Domain(format!(
            "need at least 10^4 trials, got {trials}"
        )));
    }
    let bits = out_bits * keys.len() as u32;
    if bits > 24 {
        return Err(TabError::Feasibility(format!(
            "joint histogram needs 2^{bits} cells"
        )));
    }
    let cells = 1u64 << bits;
    let expected = trials as f64 / cells as f64;
    if expected < 5.0 {
        return Err(TabError::Binning(format!(
            "cell expectation {expected:.2} < 5; raise trials or coarsen the range"
        )));
    }

    let mut counts = vec![0u64; cells as usize];
    for trial in 0..trials {
        let h = factory(trial);
        let mut idx = 0usize;
        for (i, &key) in keys.iter().enumerate() {
            idx |= (h.hash(key) as usize) << (out_bits * i as u32);
        }
        counts[idx] += 1;
    }

    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let df = cells - 1;
    let dist = ChiSquared::new(df as f64)
        .map_err(|e| TabError::Domain(format!("chi-square setup: {e}")))?;
    let p_value = 1.0 - dist.cdf(statistic);
    Ok(ChiSquareReport {
        statistic,
        degrees_of_freedom: df,
        p_value,
        trials,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashers::{SimpleTab, TrulyRandom};
    use crate::keyspace::{EntropySource, TabConfig};

    #[test]
    fn null_calibration_on_truly_random() {
        // Independent idealized hashers: p-values spread over (0, 1) rather
        // than piling onto either end.
        let keys = [3u64, 17, 200];
        let mut ps = Vec::new();
        for rep in 0..20u64 {
            let rep_base = rep * 1_000_000;
            let r = independence_chi_square(
                |t| TrulyRandom::new(rep_base + t, 2),
                &keys,
                2,
                12_000,
            )
            .unwrap();
            ps.push(r.p_value);
        }
        let significant = ps.iter().filter(|&&p| p < 0.001).count();
        assert!(significant <= 1, "p-values {ps:?}");
        let mean = ps.iter().sum::<f64>() / ps.len() as f64;
        assert!((0.15..=0.85).contains(&mean), "mean p {mean}");
    }

    #[test]
    fn simple_tab_three_keys_not_significant() {
        let cfg = TabConfig::new(4, 2, 4, 0).unwrap();
        let keys = [0u64, 1, 255];
        let mut significant = 0;
        for rep in 0..20u64 {
            let r = independence_chi_square(
                |t| {
                    SimpleTab::from_source(cfg, &EntropySource::seeded(rep * 1_000_000 + t))
                        .unwrap()
                },
                &keys,
                4,
                25_000,
            )
            .unwrap();
            if r.p_value < 0.001 {
                significant += 1;
            }
        }
        // 20 repetitions at α = 0.001: more than one rejection is a red flag.
        assert!(significant <= 1, "{significant} of 20 significant");
    }

    #[test]
    fn rectangle_xor_is_degenerate_at_zero() {
        // The XOR of the four rectangle hashes never moves, so treating it as
        // a 1-key statistic gives the most extreme possible chi-square.
        let cfg = TabConfig::new(4, 2, 4, 0).unwrap();
        let rect = [0x00u64, 0x03, 0x50, 0x53]; // {0,3} x {0,5}
        let mut xor_counts = vec![0u64; 16];
        for t in 0..10_000u64 {
            let h = SimpleTab::from_source(cfg, &EntropySource::seeded(t)).unwrap();
            let x = rect.iter().fold(0u64, |acc, &k| acc ^ h.hash(k));
            xor_counts[x as usize] += 1;
        }
        assert_eq!(xor_counts[0], 10_000);
        assert!(xor_counts[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn binning_guard() {
        let err = independence_chi_square(|t| TrulyRandom::new(t, 8), &[1, 2], 8, 10_000)
            .unwrap_err();
        assert!(matches!(err, TabError::Binning(_)));
    }
}
