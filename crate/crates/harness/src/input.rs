use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use tabhash::{Result, TabConfig, TabError};

/// The key-set generators behind the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// n distinct uniform keys.
    Random,
    /// base, base + 1, ..., base + n - 1 (base 0 here).
    Consecutive,
    /// Cartesian product of dense character intervals, near-cubic sides,
    /// truncated to n keys. The structured inputs that stress weak hashing.
    Rectangle,
}

impl InputKind {
    pub fn id(&self) -> &'static str {
        match self {
            InputKind::Random => "random",
            InputKind::Consecutive => "consecutive",
            InputKind::Rectangle => "rectangle",
        }
    }
}

/// Generates `n` distinct keys of the requested shape inside `cfg`'s
/// universe. `seed` only matters for the random kind.
pub fn gen_input(kind: InputKind, n: u64, cfg: &TabConfig, seed: u64) -> Result<Vec<u64>> {
    if (n as u128) > cfg.universe() {
        return Err(TabError::Domain(format!(
            "n = {n} exceeds the universe of {} keys",
            cfg.universe()
        )));
    }
    Ok(match kind {
        InputKind::Random => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut seen = std::collections::HashSet::with_capacity(n as usize);
            let mut keys = Vec::with_capacity(n as usize);
            let universe = cfg.universe();
            while keys.len() < n as usize {
                let x = (rng.gen::<u128>() % universe) as u64;
                if seen.insert(x) {
                    keys.push(x);
                }
            }
            keys
        }
        InputKind::Consecutive => (0..n).collect(),
        InputKind::Rectangle => {
            let c = cfg.chars();
            // Smallest equal side with side^c >= n, capped at the alphabet.
            let mut side = 1u64;
            while side.saturating_pow(c) < n && side < cfg.sigma() as u64 {
                side += 1;
            }
            let mut keys = Vec::with_capacity(n as usize);
            let mut idx = vec![0u64; c as usize];
            'outer: loop {
                let mut key = 0u64;
                for (i, &ch) in idx.iter().enumerate() {
                    key |= ch << (i as u32 * cfg.char_bits());
                }
                keys.push(key);
                if keys.len() == n as usize {
                    break;
                }
                // Odometer increment, character 0 fastest.
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < side {
                        continue 'outer;
                    }
                    *slot = 0;
                }
                break; // odometer wrapped; side^c == n exactly
            }
            keys
        }
    })
}

/// A 2x2 rectangle on character positions `(i, j)`: the four keys agreeing
/// with `base` everywhere except characters `i in {a0, a1}`, `j in {b0, b1}`.
pub fn rectangle_keys(
    cfg: &TabConfig,
    base: u64,
    i: u32,
    a: (u16, u16),
    j: u32,
    b: (u16, u16),
) -> [u64; 4] {
    let cb = cfg.char_bits();
    let clear = |x: u64, pos: u32| x & !(cfg.char_mask() << (pos * cb));
    let put = |x: u64, pos: u32, ch: u16| clear(x, pos) | ((ch as u64) << (pos * cb));
    let mut out = [0u64; 4];
    let mut w = 0;
    for &ai in &[a.0, a.1] {
        for &bj in &[b.0, b.1] {
            out[w] = put(put(base, i, ai), j, bj);
            w += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consecutive_and_distinct_random() {
        let cfg = TabConfig::new(8, 2, 8, 0).unwrap();
        assert_eq!(
            gen_input(InputKind::Consecutive, 4, &cfg, 0).unwrap(),
            vec![0, 1, 2, 3]
        );
        let mut r = gen_input(InputKind::Random, 1000, &cfg, 7).unwrap();
        assert_eq!(r.len(), 1000);
        r.sort_unstable();
        r.dedup();
        assert_eq!(r.len(), 1000, "random keys must be distinct");
    }

    #[test]
    fn tiny_rectangle_is_the_witness_set() {
        let cfg = TabConfig::new(1, 2, 1, 0).unwrap();
        assert_eq!(
            gen_input(InputKind::Rectangle, 4, &cfg, 0).unwrap(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn rectangle_truncates_to_n() {
        let cfg = TabConfig::new(8, 4, 32, 0).unwrap();
        let keys = gen_input(InputKind::Rectangle, 1000, &cfg, 0).unwrap();
        assert_eq!(keys.len(), 1000);
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 1000);
        // Sides of ceil(1000^(1/4)) = 6: every character below 6.
        for k in keys {
            for i in 0..4 {
                assert!(cfg.char_at(k, i) < 6);
            }
        }
    }

    #[test]
    fn oversized_request_is_domain_error() {
        let cfg = TabConfig::new(1, 2, 1, 0).unwrap();
        assert!(matches!(
            gen_input(InputKind::Random, 5, &cfg, 0).unwrap_err(),
            TabError::Domain(_)
        ));
    }

    #[test]
    fn explicit_rectangle_keys() {
        let cfg = TabConfig::new(8, 2, 16, 0).unwrap();
        let keys = rectangle_keys(&cfg, 0, 0, (3, 7), 1, (1, 2));
        assert_eq!(keys, [0x0103, 0x0203, 0x0107, 0x0207]);
    }
}
