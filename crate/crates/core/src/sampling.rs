//! Random support selection and comparison sampling.
//!
//! Every random draw in the crate goes through [`ChaCha8Rng`] seeded with
//! [`seeded_rng`]. A run is reproducible from its seed: each phase (instance
//! generation, support selection, comparisons, ...) reads its own ChaCha
//! stream, so changing how one phase consumes randomness never shifts the
//! others.

use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gumbel};

use crate::dataset::{ComparisonDataset, PairCount};
use crate::{Error, FeatureSet, PreferenceMatrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Instance = 0,
    Support = 1,
    Comparisons = 2,
    Orders = 3,
    Simulation = 4,
}

pub fn seeded_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportScheme {
    /// Exactly `m` distinct pairs chosen uniformly.
    #[default]
    Uniform,
    /// Each pair independently with probability `m / (n choose 2)`.
    Bernoulli,
}

impl FromStr for SupportScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "bernoulli" => Ok(Self::Bernoulli),
            other => Err(Error::Parse(format!("unknown support scheme `{other}`"))),
        }
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All `i < j` pairs in lexicographic order.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

/// Selects the compared pairs; returned sorted, canonical `i < j`.
pub fn sample_support<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    scheme: SupportScheme,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let total = pair_count(n);
    if m == 0 || m > total {
        return Err(Error::InvalidInput(format!(
            "pair count m={m} outside 1..={total} for n={n}"
        )));
    }
    let pairs = all_pairs(n);
    let mut picked: Vec<(usize, usize)> = match scheme {
        SupportScheme::Uniform => index::sample(rng, total, m).into_iter().map(|k| pairs[k]).collect(),
        SupportScheme::Bernoulli => {
            let rate = m as f64 / total as f64;
            pairs.into_iter().filter(|_| rng.random::<f64>() < rate).collect()
        }
    };
    picked.sort_unstable();
    Ok(picked)
}

/// Draws `trials` Bernoulli(`P_ij`) comparisons for every pair in `support`.
pub fn sample_comparisons<R: Rng + ?Sized>(
    p: &PreferenceMatrix,
    features: &FeatureSet,
    support: &[(usize, usize)],
    trials: u64,
    rng: &mut R,
) -> Result<ComparisonDataset> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one comparison per pair".into()));
    }
    if p.n() != features.n() {
        return Err(Error::DimensionMismatch(format!(
            "preference matrix over {} items, features over {}",
            p.n(),
            features.n()
        )));
    }
    let mut counts = Vec::with_capacity(support.len());
    for &(i, j) in support {
        let dist = Binomial::new(trials, p.get(i, j))
            .map_err(|e| Error::InvalidInput(format!("binomial({trials}, {}): {e}", p.get(i, j))))?;
        counts.push(PairCount::new(i, j, dist.sample(rng), trials));
    }
    ComparisonDataset::new(features.clone(), counts)
}

/// Per-user preference orders from a random-utility model: each user ranks
/// `len` items chosen uniformly at random by `utility + Gumbel(0, 1)`,
/// highest first. Pairwise marginals are logistic in utility differences.
pub fn sample_orders<R: Rng + ?Sized>(utility: &[f64], users: usize, len: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    let n = utility.len();
    if len < 2 || len > n {
        return Err(Error::InvalidInput(format!("order length must be in 2..={n}, got {len}")));
    }
    if utility.iter().any(|u| !u.is_finite()) {
        return Err(Error::InvalidInput("utilities must be finite".into()));
    }
    let noise = Gumbel::new(0.0, 1.0).expect("unit Gumbel is valid");
    let mut orders = Vec::with_capacity(users);
    for _ in 0..users {
        let mut scored: Vec<(f64, usize)> =
            index::sample(rng, n, len).into_iter().map(|i| (utility[i] + noise.sample(rng), i)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        orders.push(scored.into_iter().map(|(_, i)| i).collect());
    }
    Ok(orders)
}
