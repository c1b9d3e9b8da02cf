//! Rank aggregation: the Copeland procedure and an exhaustive oracle.

use crate::{dist, Error, PreferenceMatrix, Ranking, Result};

/// Number of opponents each item beats with probability above 1/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopelandScores(pub Vec<usize>);

impl CopelandScores {
    pub fn of(m: &PreferenceMatrix) -> Self {
        let n = m.n();
        Self((0..n).map(|i| (0..n).filter(|&j| m.get(i, j) > 0.5).count()).collect())
    }

    pub fn all_distinct(&self) -> bool {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// Sorts items by Copeland score, highest first; ties go to the smaller index.
pub fn copeland(m: &PreferenceMatrix) -> (Ranking, CopelandScores) {
    let scores = CopelandScores::of(m);
    let mut order: Vec<usize> = (0..m.n()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(scores.0[i]));
    let ranking = Ranking::from_order(&order).expect("sorted indices form a permutation");
    (ranking, scores)
}

pub const BRUTE_FORCE_MAX_ITEMS: usize = 10;

/// Exhaustive minimizer of `dist` over all `n!` rankings; among ties the
/// lexicographically smallest best-first order wins.
pub fn brute_force_optimal(p: &PreferenceMatrix) -> Result<(Ranking, f64)> {
    let n = p.n();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least two items, got {n}")));
    }
    if n > BRUTE_FORCE_MAX_ITEMS {
        return Err(Error::InvalidInput(format!(
            "exhaustive search limited to {BRUTE_FORCE_MAX_ITEMS} items, got {n}"
        )));
    }
    // loses[a][b]: placing a above b contradicts a strict preference.
    let loses: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| p.get(a, b) < 0.5).collect()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_order = order.clone();
    let mut best = usize::MAX;
    loop {
        let mut errors = 0;
        for x in 0..n {
            for y in (x + 1)..n {
                errors += loses[order[x]][order[y]] as usize;
            }
        }
        if errors < best {
            best = errors;
            best_order.clone_from(&order);
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    let ranking = Ranking::from_order(&best_order)?;
    let min = best as f64 / (n * (n - 1) / 2) as f64;
    Ok((ranking, min))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `dist(copeland(P), P) / min dist`. When the optimum is 0 the ratio is 1
/// if Copeland is also exact and infinite otherwise.
pub fn approximation_ratio(p: &PreferenceMatrix) -> Result<f64> {
    let (_, min) = brute_force_optimal(p)?;
    let (ranking, _) = copeland(p);
    let got = dist(&ranking, p)?;
    Ok(if min > 0.0 {
        got / min
    } else if got == 0.0 {
        1.0
    } else {
        f64::INFINITY
    })
}
