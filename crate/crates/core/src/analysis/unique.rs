use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Result, TabError};
use crate::hashers::DoubleTab;

/// Per-key derived output characters for a key set, the input to the
/// uniqueness and peeling analyses.
#[derive(Debug, Clone)]
pub struct DerivedKeyMatrix {
    keys: Vec<u64>,
    rows: Vec<Vec<u16>>,
    width: usize,
}

impl DerivedKeyMatrix {
    pub fn new(keys: Vec<u64>, rows: Vec<Vec<u16>>) -> Result<Self> {
        if keys.len() != rows.len() {
            return Err(TabError::Input(format!(
                "{} keys but {} rows",
                keys.len(),
                rows.len()
            )));
        }
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(TabError::Input("rows have differing widths".into()));
        }
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(TabError::Input("duplicate key identifiers".into()));
        }
        Ok(DerivedKeyMatrix { keys, rows, width })
    }

    /// Rows are the inner function's derived characters for each key.
    pub fn from_double(h: &DoubleTab, keys: &[u64]) -> Result<Self> {
        let rows = keys.iter().map(|&x| h.inner_chars(x)).collect();
        DerivedKeyMatrix::new(keys.to_vec(), rows)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn rows(&self) -> &[Vec<u16>] {
        &self.rows
    }

    /// The sub-matrix for the given row indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        DerivedKeyMatrix::new(
            indices.iter().map(|&i| self.keys[i]).collect(),
            indices.iter().map(|&i| self.rows[i].clone()).collect(),
        )
    }
}

/// Outcome of [`peel_unique`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PeelVerdict {
    Peelable,
    /// Keys left when no row holds a unique (position, value) pair any more,
    /// in ascending key order.
    Residual(Vec<u64>),
}

impl PeelVerdict {
    pub fn is_peelable(&self) -> bool {
        matches!(self, PeelVerdict::Peelable)
    }
}

/// Iteratively removes rows holding a (position, value) pair unique among the
/// remaining rows; lowest key id first so residuals are reproducible.
///
/// Peels completely if and only if every non-empty subset of the rows has a
/// unique output character: uniqueness in a superset implies uniqueness in a
/// subset, so peeling stalls exactly on a subset with none.
pub fn peel_unique(m: &DerivedKeyMatrix) -> PeelVerdict {
    let n = m.len();
    if n == 0 {
        return PeelVerdict::Peelable;
    }
    let d = m.width();
    const STRIDE: usize = 1 << 16;
    let mut counts = vec![0u32; d * STRIDE];
    let mut holders: Vec<Vec<u32>> = vec![Vec::new(); d * STRIDE];
    for (i, row) in m.rows().iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let slot = j * STRIDE + v as usize;
            counts[slot] += 1;
            holders[slot].push(i as u32);
        }
    }

    let mut alive = vec![true; n];
    let mut queued = vec![false; n];
    let mut queue: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    let removable = |counts: &[u32], row: &[u16]| {
        row.iter()
            .enumerate()
            .any(|(j, &v)| counts[j * STRIDE + v as usize] == 1)
    };
    for i in 0..n {
        if removable(&counts, &m.rows()[i]) {
            queue.push(Reverse((m.keys()[i], i as u32)));
            queued[i] = true;
        }
    }

    let mut remaining = n;
    while let Some(Reverse((_, i))) = queue.pop() {
        let i = i as usize;
        queued[i] = false;
        if !alive[i] || !removable(&counts, &m.rows()[i]) {
            continue;
        }
        alive[i] = false;
        remaining -= 1;
        for (j, &v) in m.rows()[i].iter().enumerate() {
            let slot = j * STRIDE + v as usize;
            counts[slot] -= 1;
            if counts[slot] == 1 {
                // The one survivor holding this pair becomes removable.
                let survivor = holders[slot]
                    .iter()
                    .copied()
                    .find(|&h| alive[h as usize])
                    .expect("count says one holder is alive");
                let s = survivor as usize;
                if !queued[s] {
                    queue.push(Reverse((m.keys()[s], survivor)));
                    queued[s] = true;
                }
            }
        }
    }

    if remaining == 0 {
        PeelVerdict::Peelable
    } else {
        let mut residual: Vec<u64> = (0..n).filter(|&i| alive[i]).map(|i| m.keys()[i]).collect();
        residual.sort_unstable();
        PeelVerdict::Residual(residual)
    }
}

/// Direct definition check over every non-empty subset: true iff each one
/// has a unique output character. Exponential; guarded at 24 rows.
pub fn subset_check_unique(m: &DerivedKeyMatrix) -> Result<bool> {
    let n = m.len();
    if n > 24 {
        return Err(TabError::Feasibility(format!(
            "2^{n} subsets exceed the exhaustive guard of 2^24"
        )));
    }
    let rows = m.rows();
    'subsets: for mask in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        for &i in &members {
            for j in 0..m.width() {
                let v = rows[i][j];
                if members
                    .iter()
                    .all(|&o| o == i || rows[o][j] != v)
                {
                    continue 'subsets; // this subset has a unique output character
                }
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Outcome of [`is_k_unique`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum KUniqueVerdict {
    KUnique,
    /// Row indices of a violating subset of size at most k.
    Witness(Vec<usize>),
}

impl KUniqueVerdict {
    pub fn is_k_unique(&self) -> bool {
        matches!(self, KUniqueVerdict::KUnique)
    }
}

/// Decides whether every non-empty subset of at most `k` rows has a unique
/// output character. Exhaustive and exact for `k <= 4`, `rows <= 2^20`.
///
/// Structure used instead of raw subset enumeration (the verdicts agree):
/// a subset of size 2 or 3 lacks a unique output character only when it
/// contains two identical rows, and a duplicate-free 4-subset fails only
/// when at every position its values pair up, which forces a decomposition
/// into two pairs agreeing at position 0.
pub fn is_k_unique(rows: &[Vec<u16>], k: usize) -> Result<KUniqueVerdict> {
    if k == 0 {
        return Err(TabError::Domain("k must be at least 1".into()));
    }
    if rows.len() > 1 << 20 || k > 4 {
        return Err(TabError::Feasibility(format!(
            "exhaustive mode supports at most 2^20 rows and k <= 4, got {} rows, k = {k}",
            rows.len()
        )));
    }
    let width = rows.first().map_or(1, |r| r.len());
    if width == 0 {
        return Err(TabError::Input("rows need at least one output character".into()));
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(TabError::Input("rows have differing widths".into()));
    }
    if k == 1 || rows.len() < 2 {
        return Ok(KUniqueVerdict::KUnique);
    }

    // Duplicate rows settle every subset size up to 3.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_unstable_by(|&a, &b| rows[a].cmp(&rows[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if rows[w[0]] == rows[w[1]] {
            let mut witness = vec![w[0], w[1]];
            witness.sort_unstable();
            return Ok(KUniqueVerdict::Witness(witness));
        }
    }
    if k < 4 || rows.len() < 4 {
        return Ok(KUniqueVerdict::KUnique);
    }

    // k = 4, all rows distinct: enumerate pairs agreeing at position 0 and
    // test pairs of disjoint pairs.
    let mut by_first: std::collections::HashMap<u16, Vec<usize>> = std::collections::HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        by_first.entry(row[0]).or_default().push(i);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for group in by_first.values() {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    const PAIR_BUDGET: usize = 1 << 15;
    if pairs.len() > PAIR_BUDGET {
        return Err(TabError::Feasibility(format!(
            "{} position-0 pairs exceed the k = 4 search budget of {PAIR_BUDGET}",
            pairs.len()
        )));
    }
    pairs.sort_unstable();
    let fails = |quad: [usize; 4]| {
        (0..width).all(|j| {
            let mut v = [
                rows[quad[0]][j],
                rows[quad[1]][j],
                rows[quad[2]][j],
                rows[quad[3]][j],
            ];
            v.sort_unstable();
            v[0] == v[1] && v[2] == v[3]
        })
    };
    for (a, &(i1, j1)) in pairs.iter().enumerate() {
        for &(i2, j2) in &pairs[a + 1..] {
            if i2 == i1 || i2 == j1 || j2 == i1 || j2 == j1 {
                continue;
            }
            let quad = [i1, j1, i2, j2];
            if fails(quad) {
                let mut witness = quad.to_vec();
                witness.sort_unstable();
                return Ok(KUniqueVerdict::Witness(witness));
            }
        }
    }
    Ok(KUniqueVerdict::KUnique)
}

/// Randomized mode for sizes the exhaustive search cannot cover: tests
/// `samples` uniformly drawn subsets of size at most `k`. A `KUnique`
/// verdict here is evidence, not proof.
pub fn is_k_unique_sampled(
    rows: &[Vec<u16>],
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<KUniqueVerdict> {
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};

    if k < 2 || rows.len() < 2 {
        return Ok(KUniqueVerdict::KUnique);
    }
    let width = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != width) {
        return Err(TabError::Input("rows have differing widths".into()));
    }
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let size = rng.gen_range(2..=k.min(rows.len()));
        let subset: Vec<usize> = sample(&mut rng, rows.len(), size).into_vec();
        let unique = subset.iter().any(|&i| {
            (0..width).any(|j| subset.iter().all(|&o| o == i || rows[o][j] != rows[i][j]))
        });
        if !unique {
            let mut witness = subset;
            witness.sort_unstable();
            return Ok(KUniqueVerdict::Witness(witness));
        }
    }
    Ok(KUniqueVerdict::KUnique)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<u16>>) -> DerivedKeyMatrix {
        let keys = (0..rows.len() as u64).collect();
        DerivedKeyMatrix::new(keys, rows).unwrap()
    }

    /// Independent oracle: raw subset enumeration up to size k.
    fn naive_k_unique(rows: &[Vec<u16>], k: usize) -> bool {
        let n = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if members.len() > k {
                continue;
            }
            let unique = members.iter().any(|&i| {
                (0..width).any(|j| members.iter().all(|&o| o == i || rows[o][j] != rows[i][j]))
            });
            if !unique {
                return false;
            }
        }
        true
    }

    #[test]
    fn injective_single_column_is_k_unique() {
        let rows: Vec<Vec<u16>> = (0..32u16).map(|v| vec![v]).collect();
        for k in 1..=4 {
            assert!(is_k_unique(&rows, k).unwrap().is_k_unique());
        }
    }

    #[test]
    fn constant_function_fails_at_two() {
        let rows = vec![vec![7u16, 7], vec![7, 7], vec![7, 7]];
        match is_k_unique(&rows, 2).unwrap() {
            KUniqueVerdict::Witness(w) => assert_eq!(w.len(), 2),
            v => panic!("expected witness, got {v:?}"),
        }
    }

    #[test]
    fn rectangle_rows_fail_at_four() {
        // Four rows pairing up at every position.
        let rows = vec![
            vec![0u16, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
        ];
        assert!(is_k_unique(&rows, 3).unwrap().is_k_unique());
        match is_k_unique(&rows, 4).unwrap() {
            KUniqueVerdict::Witness(w) => assert_eq!(w, vec![0, 1, 2, 3]),
            v => panic!("expected witness, got {v:?}"),
        }
    }

    proptest! {
        #[test]
        fn matches_naive_enumeration(
            rows in proptest::collection::vec(proptest::collection::vec(0u16..4, 2), 1..10),
            k in 1usize..=4,
        ) {
            let got = is_k_unique(&rows, k).unwrap().is_k_unique();
            prop_assert_eq!(got, naive_k_unique(&rows, k));
        }

        #[test]
        fn peel_matches_subset_check(
            rows in proptest::collection::vec(proptest::collection::vec(0u16..3, 2), 0..9),
        ) {
            let keys: Vec<u64> = (0..rows.len() as u64).collect();
            let m = DerivedKeyMatrix::new(keys, rows).unwrap();
            prop_assert_eq!(
                peel_unique(&m).is_peelable(),
                subset_check_unique(&m).unwrap()
            );
        }
    }

    #[test]
    fn peel_examples() {
        assert_eq!(peel_unique(&matrix(vec![])), PeelVerdict::Peelable);
        let twin = matrix(vec![vec![1, 2], vec![1, 2]]);
        assert_eq!(peel_unique(&twin), PeelVerdict::Residual(vec![0, 1]));
        // A chain that peels only in cascade.
        let chain = matrix(vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(peel_unique(&chain), PeelVerdict::Peelable);
    }

    #[test]
    fn peel_residual_is_deterministic_lowest_first() {
        let rows = vec![vec![5u16], vec![5], vec![5], vec![9]];
        let m = DerivedKeyMatrix::new(vec![30, 10, 20, 40], rows).unwrap();
        // Key 40 peels (value 9 unique); the three rows sharing value 5 stall.
        assert_eq!(peel_unique(&m), PeelVerdict::Residual(vec![10, 20, 30]));
    }

    #[test]
    fn sampled_mode_finds_planted_duplicates() {
        let mut rows: Vec<Vec<u16>> = (0..200u16).map(|v| vec![v, v ^ 3]).collect();
        rows.push(vec![0, 3]); // duplicate of row 0
        match is_k_unique_sampled(&rows, 2, 200_000, 1).unwrap() {
            KUniqueVerdict::Witness(w) => assert_eq!(w.len(), 2),
            v => panic!("expected witness, got {v:?}"),
        }
    }

    #[test]
    fn guards() {
        let rows = vec![vec![0u16]; 4];
        assert!(matches!(
            is_k_unique(&rows, 5).unwrap_err(),
            TabError::Feasibility(_)
        ));
        let big = matrix((0..25).map(|i| vec![i as u16]).collect());
        assert!(matches!(
            subset_check_unique(&big).unwrap_err(),
            TabError::Feasibility(_)
        ));
    }
}
