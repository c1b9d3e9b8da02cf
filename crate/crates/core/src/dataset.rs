//! Pairwise comparison datasets and the empirical preference matrix.

use std::collections::BTreeMap;

use crate::{Error, FeatureSet, PreferenceMatrix, Result};

/// Outcome counts for one compared pair, stored canonically with `i < j`;
/// `wins` counts comparisons won by `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairCount {
    pub i: usize,
    pub j: usize,
    pub wins: u64,
    pub trials: u64,
}

impl PairCount {
    /// Canonicalizes `(i, j, wins_i)` so that the smaller index comes first.
    pub fn new(i: usize, j: usize, wins_i: u64, trials: u64) -> Self {
        if i <= j {
            Self { i, j, wins: wins_i, trials }
        } else {
            Self { i: j, j: i, wins: trials.saturating_sub(wins_i), trials }
        }
    }

    pub fn rate(&self) -> f64 {
        self.wins as f64 / self.trials as f64
    }
}

/// Observed entries of an `n x n` matrix. Built from a support set it holds
/// both `(i, j)` and `(j, i)`, sorted row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    n: usize,
    entries: Vec<(usize, usize)>,
}

impl Mask {
    pub fn new(n: usize, mut entries: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, j)) = entries.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::InvalidInput(format!("mask entry ({i}, {j}) outside {n}x{n}")));
        }
        entries.sort_unstable();
        entries.dedup();
        Ok(Self { n, entries })
    }

    /// Symmetrized mask of a pair support.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let entries = pairs.into_iter().flat_map(|(i, j)| [(i, j), (j, i)]).collect();
        Self::new(n, entries)
    }

    /// Every off-diagonal entry.
    pub fn off_diagonal(n: usize) -> Self {
        let entries = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries.binary_search(&(i, j)).is_ok()
    }

    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let entries = self.entries.iter().map(|&(i, j)| (inv[i], inv[j])).collect();
        Self::new(self.n, entries).expect("relabeling keeps entries in range")
    }
}

/// Features plus comparison counts on the support set.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonDataset {
    features: FeatureSet,
    pairs: Vec<PairCount>,
}

impl ComparisonDataset {
    /// Validates and sorts the pair list. Pairs may arrive in any order and
    /// orientation; duplicates are rejected.
    pub fn new(features: FeatureSet, pairs: Vec<PairCount>) -> Result<Self> {
        let n = features.n();
        let mut pairs: Vec<PairCount> =
            pairs.into_iter().map(|c| PairCount::new(c.i, c.j, c.wins, c.trials)).collect();
        for c in &pairs {
            if c.j >= n {
                return Err(Error::InvalidInput(format!("pair ({}, {}) outside {n} items", c.i, c.j)));
            }
            if c.i == c.j {
                return Err(Error::InvalidInput(format!("self-comparison of item {}", c.i)));
            }
            if c.trials == 0 || c.wins > c.trials {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) has {} wins out of {} trials",
                    c.i, c.j, c.wins, c.trials
                )));
            }
        }
        pairs.sort_unstable_by_key(|c| (c.i, c.j));
        if let Some(w) = pairs.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidInput(format!("duplicate pair ({}, {})", w[0].i, w[0].j)));
        }
        Ok(Self { features, pairs })
    }

    pub fn n(&self) -> usize {
        self.features.n()
    }

    pub fn d(&self) -> usize {
        self.features.d()
    }

    /// Number of distinct compared pairs.
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn pairs(&self) -> &[PairCount] {
        &self.pairs
    }

    pub fn support(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|c| (c.i, c.j)).collect()
    }

    pub fn mask(&self) -> Mask {
        Mask::from_pairs(self.n(), self.support()).expect("pairs validated on construction")
    }

    /// Same data with items relabeled: new item `a` is old item `perm[a]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let pairs = self.pairs.iter().map(|c| PairCount::new(inv[c.i], inv[c.j], c.wins, c.trials)).collect();
        Self::new(self.features.relabeled(perm)?, pairs)
    }
}

/// Empirical preference matrix: observed win rates on the support, their
/// complements on the transposed entries, and 1/2 everywhere else.
pub fn empirical_preference(data: &ComparisonDataset) -> (PreferenceMatrix, Mask) {
    let n = data.n();
    let mut rates = vec![None; n * n];
    for c in data.pairs() {
        rates[c.i * n + c.j] = Some(c.rate());
    }
    let p = PreferenceMatrix::from_upper(n, |i, j| rates[i * n + j].unwrap_or(0.5));
    (p, data.mask())
}

/// Converts per-user preference orders (best first, any subset of items)
/// into pair counts: every user contributes one trial to each pair they
/// ordered, won by the item listed first.
pub fn orders_to_comparisons(orders: &[Vec<usize>], features: &FeatureSet) -> Result<ComparisonDataset> {
    let n = features.n();
    let mut counts: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    let mut seen = vec![usize::MAX; n];
    for (user, order) in orders.iter().enumerate() {
        for &item in order {
            if item >= n {
                return Err(Error::MalformedOrder(format!("user {user}: item {item} outside 0..{n}")));
            }
            if seen[item] == user {
                return Err(Error::MalformedOrder(format!("user {user}: item {item} listed twice")));
            }
            seen[item] = user;
        }
        for (a, &winner) in order.iter().enumerate() {
            for &loser in &order[a + 1..] {
                let key = (winner.min(loser), winner.max(loser));
                let entry = counts.entry(key).or_default();
                if winner < loser {
                    entry.0 += 1;
                }
                entry.1 += 1;
            }
        }
    }
    let pairs = counts.into_iter().map(|((i, j), (wins, trials))| PairCount { i, j, wins, trials }).collect();
    ComparisonDataset::new(features.clone(), pairs)
}
