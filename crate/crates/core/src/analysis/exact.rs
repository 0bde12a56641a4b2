use serde::Serialize;

use crate::error::{Result, TabError};
use crate::hashers::{HeadPos, KeyHasher, SimpleTab, TwistedTab};
use crate::keyspace::{CharTable, TabConfig};

/// Which construction to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumScheme {
    Simple,
    Twisted,
}

/// Exact joint distribution of the hashes of a key tuple over every table
/// filling, each filling weighted equally.
#[derive(Debug, Clone, Serialize)]
pub struct JointDistribution {
    pub keys: Vec<u64>,
    pub out_bits: u32,
    /// Histogram over `(2^out_bits)^k` outcome tuples; tuple `(h_0, ..,
    /// h_{k-1})` sits at index `Σ h_i << (out_bits * i)`.
    pub counts: Vec<u64>,
    /// Number of enumerated fillings.
    pub total: u64,
}

impl JointDistribution {
    pub fn outcome_index(&self, outcome: &[u64]) -> usize {
        outcome
            .iter()
            .enumerate()
            .map(|(i, &h)| (h as usize) << (self.out_bits * i as u32))
            .sum()
    }

    /// True when every outcome tuple is hit equally often.
    pub fn is_uniform(&self) -> bool {
        let cells = self.counts.len() as u64;
        self.total % cells == 0 && {
            let each = self.total / cells;
            self.counts.iter().all(|&c| c == each)
        }
    }

    /// Sums out all positions except the given ones (in order).
    pub fn marginal(&self, positions: &[usize]) -> JointDistribution {
        let r = self.out_bits;
        let cells = 1usize << (r * positions.len() as u32);
        let mut counts = vec![0u64; cells];
        let m = crate::keyspace::mask(r);
        for (idx, &c) in self.counts.iter().enumerate() {
            let mut out = 0usize;
            for (j, &p) in positions.iter().enumerate() {
                let h = ((idx as u64) >> (r * p as u32)) & m;
                out |= (h as usize) << (r * j as u32);
            }
            counts[out] += c;
        }
        JointDistribution {
            keys: positions.iter().map(|&p| self.keys[p]).collect(),
            out_bits: r,
            counts,
            total: self.total,
        }
    }
}

/// Writes `bits` bits of `filling` starting at cursor position into tables.
struct BitCursor {
    filling: u64,
    pos: u32,
}

impl BitCursor {
    fn take(&mut self, bits: u32) -> u64 {
        let v = (self.filling >> self.pos) & crate::keyspace::mask(bits);
        self.pos += bits;
        v
    }
}

fn set_tables(cursor: &mut BitCursor, tables: &mut [CharTable], sigma: usize, entry_bits: u32) {
    for t in tables.iter_mut() {
        for ch in 0..sigma {
            t.set(ch as u16, cursor.take(entry_bits));
        }
    }
}

/// Enumerates every table filling of the scheme at `cfg` and tallies the
/// joint distribution of the hashes of `keys`.
///
/// Guarded: the total number of table bits must be at most 24, and the
/// outcome histogram itself must stay addressable (`out_bits * k <= 24`).
pub fn exact_joint_distribution(
    cfg: &TabConfig,
    scheme: EnumScheme,
    keys: &[u64],
) -> Result<JointDistribution> {
    if keys.is_empty() {
        return Err(TabError::Domain("need at least one key".into()));
    }
    for w in 0..keys.len() {
        cfg.check_key(keys[w])?;
        if keys[w + 1..].contains(&keys[w]) {
            return Err(TabError::Input(format!("duplicate key {:#x}", keys[w])));
        }
    }
    let c = cfg.chars() as u32;
    let sigma = cfg.sigma();
    let r = cfg.out_bits();
    let total_bits = match scheme {
        EnumScheme::Simple => c * sigma as u32 * r,
        EnumScheme::Twisted => {
            if c < 2 {
                return Err(TabError::Config("twisted enumeration needs c >= 2".into()));
            }
            (c - 1) * sigma as u32 * (cfg.char_bits() + r) + sigma as u32 * r
        }
    };
    if total_bits > 24 {
        return Err(TabError::Feasibility(format!(
            "enumeration needs 2^{total_bits} fillings ({total_bits} table bits > 24)"
        )));
    }
    let hist_bits = r * keys.len() as u32;
    if hist_bits > 24 {
        return Err(TabError::Feasibility(format!(
            "outcome histogram needs 2^{hist_bits} cells (> 2^24)"
        )));
    }

    let mut counts = vec![0u64; 1usize << hist_bits];
    let total = 1u64 << total_bits;
    for filling in 0..total {
        let mut cursor = BitCursor { filling, pos: 0 };
        let mut outcome = 0usize;
        match scheme {
            EnumScheme::Simple => {
                let mut tables = vec![CharTable::zeroed(sigma, r); c as usize];
                set_tables(&mut cursor, &mut tables, sigma, r);
                let h = SimpleTab::from_tables(*cfg, tables).expect("shapes are static");
                for (i, &key) in keys.iter().enumerate() {
                    outcome |= (h.hash(key) as usize) << (r * i as u32);
                }
            }
            EnumScheme::Twisted => {
                let star_bits = cfg.char_bits() + r;
                let mut star = vec![CharTable::zeroed(sigma, star_bits); c as usize - 1];
                set_tables(&mut cursor, &mut star, sigma, star_bits);
                let mut head = vec![CharTable::zeroed(sigma, r)];
                set_tables(&mut cursor, &mut head, sigma, r);
                let h = TwistedTab::from_parts(
                    *cfg,
                    HeadPos::First,
                    star,
                    head.pop().expect("one table"),
                )
                .expect("shapes are static");
                for (i, &key) in keys.iter().enumerate() {
                    outcome |= (h.hash(key) as usize) << (r * i as u32);
                }
            }
        }
        counts[outcome] += 1;
    }

    Ok(JointDistribution {
        keys: keys.to_vec(),
        out_bits: r,
        counts,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TabConfig {
        TabConfig::new(1, 2, 1, 0).unwrap()
    }

    #[test]
    fn simple_triples_are_uniform() {
        // All 16 fillings; every triple of distinct keys from u = 4 lands on
        // each of the 8 outcomes exactly twice.
        for triple in [[0u64, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            let d = exact_joint_distribution(&tiny(), EnumScheme::Simple, &triple).unwrap();
            assert_eq!(d.total, 16);
            assert!(d.is_uniform());
            assert!(d.counts.iter().all(|&c| c == 2));
        }
    }

    #[test]
    fn simple_single_key_uniform() {
        let d = exact_joint_distribution(&tiny(), EnumScheme::Simple, &[2]).unwrap();
        assert_eq!(d.counts, vec![8, 8]);
    }

    #[test]
    fn rectangle_support_is_xor_zero() {
        // Keys (0,0),(1,0),(0,1),(1,1) = 0,1,2,3: only outcomes whose four
        // bits XOR to 0 can occur.
        let d = exact_joint_distribution(&tiny(), EnumScheme::Simple, &[0, 1, 2, 3]).unwrap();
        for (idx, &count) in d.counts.iter().enumerate() {
            let xor = (idx ^ (idx >> 1) ^ (idx >> 2) ^ (idx >> 3)) & 1;
            if xor == 1 {
                assert_eq!(count, 0, "outcome {idx:#b} should be impossible");
            }
        }
        assert!(!d.is_uniform());
    }

    #[test]
    fn twisted_triples_are_uniform() {
        for triple in [[0u64, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            let d = exact_joint_distribution(&tiny(), EnumScheme::Twisted, &triple).unwrap();
            assert_eq!(d.total, 64);
            assert!(d.is_uniform());
            assert!(d.counts.iter().all(|&c| c == 8));
        }
    }

    #[test]
    fn marginals_of_triples_are_uniform() {
        let d = exact_joint_distribution(&tiny(), EnumScheme::Simple, &[0, 1, 2]).unwrap();
        for ps in [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]] {
            assert!(d.marginal(&ps).is_uniform(), "marginal {ps:?}");
        }
    }

    #[test]
    fn feasibility_guard_names_bit_count() {
        let cfg = TabConfig::new(8, 2, 16, 0).unwrap();
        let err = exact_joint_distribution(&cfg, EnumScheme::Simple, &[0, 1]).unwrap_err();
        match err {
            TabError::Feasibility(msg) => assert!(msg.contains("8192"), "{msg}"),
            other => panic!("expected feasibility error, got {other}"),
        }
    }

    #[test]
    fn rejects_duplicates() {
        assert!(matches!(
            exact_joint_distribution(&tiny(), EnumScheme::Simple, &[1, 1]).unwrap_err(),
            TabError::Input(_)
        ));
    }
}
