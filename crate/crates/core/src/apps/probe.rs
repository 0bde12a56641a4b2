use serde::Serialize;

use crate::error::{Result, TabError};
use crate::hashers::KeyHasher;

/// One hash-table operation for replayable workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableOp {
    Insert(u64),
    Query(u64),
    Delete(u64),
}

/// Anything that executes operations and reports a probe count per operation.
pub trait ProbeTable {
    fn run(&mut self, op: TableOp) -> Result<u64>;
}

/// Cumulative probe counters.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ProbeStats {
    pub operations: u64,
    pub probes: u64,
}

/// Open addressing with linear probing over a power-of-two slot array.
/// Deletion backward-shifts instead of leaving tombstones, so probe-count
/// statistics stay clean across long workloads.
pub struct LinearProbeTable<H: KeyHasher> {
    slots: Vec<Option<(u64, u64)>>,
    mask: usize,
    hasher: H,
    len: usize,
    stats: ProbeStats,
}

impl<H: KeyHasher> LinearProbeTable<H> {
    /// `capacity` must be a power of two.
    pub fn new(capacity: usize, hasher: H) -> Result<Self> {
        if capacity == 0 || !capacity.is_power_of_two() {
            return Err(TabError::Config(format!(
                "capacity {capacity} is not a power of two"
            )));
        }
        Ok(LinearProbeTable {
            slots: vec![None; capacity],
            mask: capacity - 1,
            hasher,
            len: 0,
            stats: ProbeStats::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn stats(&self) -> ProbeStats {
        self.stats
    }

    #[inline]
    fn home(&self, key: u64) -> usize {
        self.hasher.hash(key) as usize & self.mask
    }

    /// Places `key` at the first empty slot in forward scan order and returns
    /// the number of slots examined (the filled slot included). Re-inserting
    /// a present key updates its payload at the same cost as the lookup.
    pub fn insert(&mut self, key: u64, payload: u64) -> Result<u64> {
        if self.len == self.capacity() {
            return Err(TabError::Capacity(format!(
                "table of {} slots is full",
                self.capacity()
            )));
        }
        let mut pos = self.home(key);
        let mut probes = 1u64;
        loop {
            match self.slots[pos] {
                None => {
                    self.slots[pos] = Some((key, payload));
                    self.len += 1;
                    break;
                }
                Some((k, _)) if k == key => {
                    self.slots[pos] = Some((key, payload));
                    break;
                }
                Some(_) => {
                    pos = (pos + 1) & self.mask;
                    probes += 1;
                }
            }
        }
        self.stats.operations += 1;
        self.stats.probes += probes;
        Ok(probes)
    }

    /// Scans from the hash slot until the key or an empty slot; an
    /// unsuccessful search examines exactly the slots an insert would.
    pub fn query(&mut self, key: u64) -> (Option<u64>, u64) {
        let mut pos = self.home(key);
        let mut probes = 1u64;
        let found = loop {
            match self.slots[pos] {
                None => break None,
                Some((k, v)) if k == key => break Some(v),
                Some(_) => {
                    pos = (pos + 1) & self.mask;
                    probes += 1;
                }
            }
        };
        self.stats.operations += 1;
        self.stats.probes += probes;
        (found, probes)
    }

    /// Backward-shift deletion; false when the key is absent.
    pub fn delete(&mut self, key: u64) -> bool {
        let mut pos = self.home(key);
        loop {
            match self.slots[pos] {
                None => return false,
                Some((k, _)) if k == key => break,
                Some(_) => pos = (pos + 1) & self.mask,
            }
        }
        self.slots[pos] = None;
        self.len -= 1;
        // Shift later entries back while they remain reachable.
        let mut hole = pos;
        let mut cur = (pos + 1) & self.mask;
        while let Some((k, v)) = self.slots[cur] {
            let home = self.home(k);
            // Move k into the hole unless its home lies in (hole, cur]
            // cyclically, in which case it stays reachable where it is.
            let stays = cyclic_in(hole, home, cur);
            if !stays {
                self.slots[hole] = Some((k, v));
                self.slots[cur] = None;
                hole = cur;
            }
            cur = (cur + 1) & self.mask;
        }
        true
    }

    /// Every stored key must be reachable by forward scan from its hash slot
    /// without crossing an empty slot.
    pub fn check_reachability(&self) -> bool {
        for (pos, slot) in self.slots.iter().enumerate() {
            if let Some((k, _)) = slot {
                let mut p = self.home(*k);
                loop {
                    if p == pos {
                        break;
                    }
                    if self.slots[p].is_none() {
                        return false;
                    }
                    p = (p + 1) & self.mask;
                }
            }
        }
        true
    }
}

/// True when `x` lies in the half-open cyclic interval `(lo, hi]`.
#[inline]
fn cyclic_in(lo: usize, x: usize, hi: usize) -> bool {
    if lo < hi {
        lo < x && x <= hi
    } else {
        x > lo || x <= hi
    }
}

impl<H: KeyHasher> ProbeTable for LinearProbeTable<H> {
    fn run(&mut self, op: TableOp) -> Result<u64> {
        match op {
            TableOp::Insert(k) => self.insert(k, 0),
            TableOp::Query(k) => Ok(self.query(k).1),
            TableOp::Delete(k) => {
                let (_, probes) = self.query(k);
                self.delete(k);
                Ok(probes)
            }
        }
    }
}

/// Hashing with chaining; probes are the chain entries examined plus one.
pub struct ChainingTable<H: KeyHasher> {
    buckets: Vec<Vec<u64>>,
    mask: usize,
    hasher: H,
}

impl<H: KeyHasher> ChainingTable<H> {
    pub fn new(buckets: usize, hasher: H) -> Result<Self> {
        if buckets == 0 || !buckets.is_power_of_two() {
            return Err(TabError::Config(format!(
                "bucket count {buckets} is not a power of two"
            )));
        }
        Ok(ChainingTable {
            buckets: vec![Vec::new(); buckets],
            mask: buckets - 1,
            hasher,
        })
    }

    pub fn insert(&mut self, key: u64) -> u64 {
        let b = self.hasher.hash(key) as usize & self.mask;
        let scanned = self.buckets[b].iter().position(|&k| k == key);
        let probes = scanned.map_or(self.buckets[b].len(), |i| i) as u64 + 1;
        if scanned.is_none() {
            self.buckets[b].push(key);
        }
        probes
    }

    pub fn query(&self, key: u64) -> (bool, u64) {
        let b = self.hasher.hash(key) as usize & self.mask;
        match self.buckets[b].iter().position(|&k| k == key) {
            Some(i) => (true, i as u64 + 1),
            None => (false, self.buckets[b].len() as u64 + 1),
        }
    }

    pub fn delete(&mut self, key: u64) -> bool {
        let b = self.hasher.hash(key) as usize & self.mask;
        match self.buckets[b].iter().position(|&k| k == key) {
            Some(i) => {
                self.buckets[b].swap_remove(i);
                true
            }
            None => false,
        }
    }
}

impl<H: KeyHasher> ProbeTable for ChainingTable<H> {
    fn run(&mut self, op: TableOp) -> Result<u64> {
        Ok(match op {
            TableOp::Insert(k) => self.insert(k),
            TableOp::Query(k) => self.query(k).1,
            TableOp::Delete(k) => {
                let (_, probes) = self.query(k);
                self.delete(k);
                probes
            }
        })
    }
}

/// Runs the operations in windows of `window_len` and reports each window's
/// total probe count (the trailing partial window included).
pub fn window_cost<T: ProbeTable>(
    table: &mut T,
    ops: &[TableOp],
    window_len: usize,
) -> Result<Vec<u64>> {
    if window_len == 0 {
        return Err(TabError::Domain("window length must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(ops.len().div_ceil(window_len));
    for window in ops.chunks(window_len) {
        let mut total = 0u64;
        for &op in window {
            total += table.run(op)?;
        }
        out.push(total);
    }
    Ok(out)
}
