use serde::Serialize;

use crate::error::{Result, TabError};
use crate::hashers::KeyHasher;

/// Two tables addressed by two independent hashers; every stored key sits at
/// `h0(x) mod m` in table 0 or `h1(x) mod m` in table 1.
#[derive(Debug)]
pub struct CuckooTables {
    tables: [Vec<Option<u64>>; 2],
    size: usize,
    pub kicks_used: u64,
}

impl CuckooTables {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains<H0: KeyHasher, H1: KeyHasher>(&self, h0: &H0, h1: &H1, key: u64) -> bool {
        self.tables[0][h0.hash(key) as usize % self.size] == Some(key)
            || self.tables[1][h1.hash(key) as usize % self.size] == Some(key)
    }

    pub fn occupancy(&self) -> usize {
        self.tables
            .iter()
            .map(|t| t.iter().filter(|s| s.is_some()).count())
            .sum()
    }
}

/// A build that gave up: the key whose eviction chain exceeded the budget.
#[derive(Debug, Clone, Serialize)]
pub struct CuckooFailure {
    pub witness: u64,
    pub kicks_used: u64,
}

/// Standard eviction-chain insertion of all keys. Fails when a chain exceeds
/// `max_kicks`; duplicate input keys are rejected up front.
pub fn cuckoo_build<H0: KeyHasher, H1: KeyHasher>(
    keys: &[u64],
    h0: &H0,
    h1: &H1,
    size: usize,
    max_kicks: u64,
) -> Result<std::result::Result<CuckooTables, CuckooFailure>> {
    if size == 0 {
        return Err(TabError::Config("table size must be positive".into()));
    }
    let mut sorted = keys.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(TabError::Input("duplicate keys in input".into()));
    }
    if keys.len() > 2 * size {
        return Err(TabError::Capacity(format!(
            "{} keys cannot fit in 2 x {size} slots",
            keys.len()
        )));
    }

    let mut t = CuckooTables {
        tables: [vec![None; size], vec![None; size]],
        size,
        kicks_used: 0,
    };
    for &key in keys {
        let mut cur = key;
        let mut side = 0usize;
        let mut kicks = 0u64;
        loop {
            let slot = match side {
                0 => h0.hash(cur) as usize % size,
                _ => h1.hash(cur) as usize % size,
            };
            match t.tables[side][slot].replace(cur) {
                None => break,
                Some(evicted) => {
                    cur = evicted;
                    side ^= 1;
                    kicks += 1;
                    t.kicks_used += 1;
                    if kicks > max_kicks {
                        return Ok(Err(CuckooFailure {
                            witness: cur,
                            kicks_used: t.kicks_used,
                        }));
                    }
                }
            }
        }
    }
    Ok(Ok(t))
}

/// Exact feasibility: placement exists iff no component of the bipartite
/// slot graph carries more keys (edges) than slots (vertices). Decided by
/// union-find, independent of insertion order.
pub fn cuckoo_feasible<H0: KeyHasher, H1: KeyHasher>(
    keys: &[u64],
    h0: &H0,
    h1: &H1,
    size: usize,
) -> Result<bool> {
    if size == 0 {
        return Err(TabError::Config("table size must be positive".into()));
    }
    let mut parent: Vec<u32> = (0..2 * size as u32).collect();
    let mut vertices: Vec<u32> = vec![1; 2 * size];
    let mut edges: Vec<u32> = vec![0; 2 * size];

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }

    for &key in keys {
        let a = find(&mut parent, (h0.hash(key) as usize % size) as u32);
        let b = find(&mut parent, (size + h1.hash(key) as usize % size) as u32);
        if a == b {
            edges[a as usize] += 1;
        } else {
            parent[b as usize] = a;
            vertices[a as usize] += vertices[b as usize];
            edges[a as usize] += edges[b as usize] + 1;
        }
    }
    for i in 0..2 * size as u32 {
        if find(&mut parent, i) == i && edges[i as usize] > vertices[i as usize] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashers::{ConstantHasher, TrulyRandom};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    #[test]
    fn single_key_lands_at_h0() {
        let h0 = TrulyRandom::new(1, 16);
        let h1 = TrulyRandom::new(2, 16);
        let t = cuckoo_build(&[77], &h0, &h1, 8, 10).unwrap().unwrap();
        assert_eq!(t.tables[0][h0.hash(77) as usize % 8], Some(77));
        assert!(t.contains(&h0, &h1, 77));
        assert_eq!(t.occupancy(), 1);
    }

    #[test]
    fn three_keys_two_slots_always_fail() {
        // Identical (h0, h1) pairs: a component with 2 vertices, 3 edges.
        let h0 = ConstantHasher::new(4, 8);
        let h1 = ConstantHasher::new(9, 8);
        let out = cuckoo_build(&[1, 2, 3], &h0, &h1, 16, 1000).unwrap();
        assert!(out.is_err());
        assert!(!cuckoo_feasible(&[1, 2, 3], &h0, &h1, 16).unwrap());
        // Two keys still fit.
        assert!(cuckoo_build(&[1, 2], &h0, &h1, 16, 1000).unwrap().is_ok());
    }

    #[test]
    fn duplicates_rejected() {
        let h = TrulyRandom::new(0, 8);
        assert!(matches!(
            cuckoo_build(&[5, 5], &h, &h, 8, 10).unwrap_err(),
            TabError::Input(_)
        ));
    }

    #[test]
    fn verdict_is_insertion_order_independent() {
        // The graph criterion decides; insertion with a generous budget must
        // agree under every shuffle.
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for trial in 0..30u64 {
            let h0 = TrulyRandom::new(1000 + trial, 16);
            let h1 = TrulyRandom::new(2000 + trial, 16);
            let size = 64usize;
            let n = 56;
            let mut keys: Vec<u64> = (0..n as u64).map(|i| i * 7 + trial).collect();
            let feasible = cuckoo_feasible(&keys, &h0, &h1, size).unwrap();
            for _ in 0..5 {
                keys.shuffle(&mut rng);
                let built = cuckoo_build(&keys, &h0, &h1, size, 4 * n as u64 + 16)
                    .unwrap()
                    .is_ok();
                assert_eq!(built, feasible, "trial {trial}");
            }
        }
    }

    #[test]
    fn placement_invariant_holds() {
        let h0 = TrulyRandom::new(3, 16);
        let h1 = TrulyRandom::new(4, 16);
        let keys: Vec<u64> = (0..50u64).collect();
        let t = cuckoo_build(&keys, &h0, &h1, 64, 1000).unwrap().unwrap();
        for &k in &keys {
            assert!(t.contains(&h0, &h1, k), "key {k} lost");
        }
        assert_eq!(t.occupancy(), keys.len());
    }
}
