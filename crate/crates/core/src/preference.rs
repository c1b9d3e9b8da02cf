//! Preference matrices, rankings and the disagreement metric between them.

use nalgebra::DMatrix;

use crate::{Error, Link, Result};

const COMPLEMENT_TOL: f64 = 1e-12;

/// Square matrix of win probabilities with `P_ij + P_ji = 1` and `P_ii = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    entries: DMatrix<f64>,
}

impl PreferenceMatrix {
    /// Validates an explicit matrix.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "preference matrix must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let p = entries[(i, j)];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidInput(format!("P[{i},{j}] = {p} outside [0, 1]")));
                }
                if (p + entries[(j, i)] - 1.0).abs() > COMPLEMENT_TOL {
                    return Err(Error::InvalidInput(format!(
                        "P[{i},{j}] + P[{j},{i}] = {} != 1",
                        p + entries[(j, i)]
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds a matrix from its strict upper triangle; the rest follows from
    /// the complement rule.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = DMatrix::from_element(n, n, 0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let p = upper(i, j).clamp(0.0, 1.0);
                entries[(i, j)] = p;
                entries[(j, i)] = 1.0 - p;
            }
        }
        Self { entries }
    }

    /// All entries 1/2.
    pub fn indifferent(n: usize) -> Self {
        Self { entries: DMatrix::from_element(n, n, 0.5) }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    /// Relabels items: entry `(a, b)` of the result is entry
    /// `(perm[a], perm[b])` of `self`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let n = self.n();
        Self { entries: DMatrix::from_fn(n, n, |a, b| self.entries[(perm[a], perm[b])]) }
    }

    /// Fraction of unordered pairs with a strict preference.
    pub fn strict_pair_fraction(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let strict = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.entries[(i, j)] != 0.5)
            .count();
        strict as f64 / pairs(n) as f64
    }
}

fn pairs(n: usize) -> usize {
    n * (n - 1) / 2
}

/// A total order of items. `position(i) < position(j)` means item `i` is
/// ranked above item `j`; position 0 is the best item.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    position: Vec<usize>,
}

impl Ranking {
    pub fn from_positions(position: Vec<usize>) -> Result<Self> {
        check_permutation(&position)?;
        Ok(Self { position })
    }

    /// Builds a ranking from items listed best first.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        check_permutation(order)?;
        let mut position = vec![0; order.len()];
        for (pos, &item) in order.iter().enumerate() {
            position[item] = pos;
        }
        Ok(Self { position })
    }

    pub fn identity(n: usize) -> Self {
        Self { position: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    pub fn position(&self, item: usize) -> usize {
        self.position[item]
    }

    pub fn positions(&self) -> &[usize] {
        &self.position
    }

    /// Items listed best first.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.position.len()];
        for (item, &pos) in self.position.iter().enumerate() {
            order[pos] = item;
        }
        order
    }

    pub fn ranks_above(&self, i: usize, j: usize) -> bool {
        self.position[i] < self.position[j]
    }

    pub fn reversed(&self) -> Self {
        let n = self.position.len();
        Self { position: self.position.iter().map(|&p| n - 1 - p).collect() }
    }

    /// Ranking of the relabeled items: new item `a` is old item `perm[a]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self { position: perm.iter().map(|&old| self.position[old]).collect() }
    }
}

fn check_permutation(values: &[usize]) -> Result<()> {
    let n = values.len();
    let mut seen = vec![false; n];
    for &v in values {
        if v >= n || seen[v] {
            return Err(Error::InvalidInput(format!("not a permutation of 0..{n}: {values:?}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Fraction of item pairs on which `ranking` contradicts a strict
/// preference of `p`. Pairs with `P_ij = 1/2` never count.
pub fn dist(ranking: &Ranking, p: &PreferenceMatrix) -> Result<f64> {
    let n = p.n();
    if n < 2 {
        return Err(Error::InvalidInput(format!("dist needs at least two items, got {n}")));
    }
    if ranking.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "ranking over {} items, preference matrix over {n}",
            ranking.len()
        )));
    }
    let mut disagree = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let pij = p.get(i, j);
            if (pij > 0.5 && !ranking.ranks_above(i, j)) || (pij < 0.5 && ranking.ranks_above(i, j)) {
                disagree += 1;
            }
        }
    }
    Ok(disagree as f64 / pairs(n) as f64)
}

/// Checks `P_ij > 1/2 and P_jk > 1/2 => P_ik > 1/2` for all triples.
pub fn is_stochastic_transitive(p: &PreferenceMatrix) -> bool {
    let n = p.n();
    let beats: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| p.get(i, j) > 0.5).collect()).collect();
    for i in 0..n {
        for j in 0..n {
            if !beats[i][j] {
                continue;
            }
            for k in 0..n {
                if beats[j][k] && !beats[i][k] {
                    return false;
                }
            }
        }
    }
    true
}

/// Entrywise `psi(clip(P_ij, clamp, 1 - clamp))`.
pub fn apply_link(p: &PreferenceMatrix, link: Link, clamp: f64) -> Result<DMatrix<f64>> {
    if !(clamp > 0.0 && clamp < 0.5) {
        return Err(Error::InvalidInput(format!("clamp level {clamp} outside (0, 1/2)")));
    }
    let out = p.entries().map(|v| link.forward(v.clamp(clamp, 1.0 - clamp)));
    assert!(out.iter().all(|v| v.is_finite()), "link transform produced a non-finite value");
    Ok(out)
}

/// Maps a link-scale matrix back to probabilities after projecting it onto
/// skew-symmetric matrices; the diagonal is pinned to 1/2.
pub fn inverse_link(m: &DMatrix<f64>, link: Link) -> Result<PreferenceMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("expected square matrix, got {}x{}", n, m.ncols())));
    }
    Ok(PreferenceMatrix::from_upper(n, |i, j| link.inverse(0.5 * (m[(i, j)] - m[(j, i)]))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_items() -> PreferenceMatrix {
        PreferenceMatrix::from_upper(3, |i, j| match (i, j) {
            (0, 1) => 0.7,
            (0, 2) => 0.8,
            _ => 0.6,
        })
    }

    #[test]
    fn dist_examples() {
        let p = three_items();
        let forward = Ranking::from_order(&[0, 1, 2]).unwrap();
        assert_eq!(dist(&forward, &p).unwrap(), 0.0);
        assert_eq!(dist(&forward.reversed(), &p).unwrap(), 1.0);
        let swapped = Ranking::from_order(&[0, 2, 1]).unwrap();
        assert!((dist(&swapped, &p).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dist_rejects_single_item() {
        let p = PreferenceMatrix::indifferent(1);
        assert!(matches!(dist(&Ranking::identity(1), &p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dist_ignores_ties() {
        let p = PreferenceMatrix::indifferent(4);
        assert_eq!(dist(&Ranking::from_order(&[3, 1, 0, 2]).unwrap(), &p).unwrap(), 0.0);
    }

    #[test]
    fn transitivity_examples() {
        let btl = [3.0, 1.0, 0.5, 2.0];
        let p = PreferenceMatrix::from_upper(4, |i, j| btl[i] / (btl[i] + btl[j]));
        assert!(is_stochastic_transitive(&p));

        let rps = PreferenceMatrix::from_upper(3, |i, j| if (i, j) == (0, 2) { 0.1 } else { 0.9 });
        assert!(!is_stochastic_transitive(&rps));

        assert!(is_stochastic_transitive(&PreferenceMatrix::indifferent(5)));
    }

    #[test]
    fn link_transform_examples() {
        let p = PreferenceMatrix::from_upper(2, |_, _| 0.75);
        let m = apply_link(&p, Link::Logit, 0.01).unwrap();
        assert!((m[(0, 1)] - 3f64.ln()).abs() < 1e-15);
        assert!((m[(1, 0)] + 3f64.ln()).abs() < 1e-15);
        assert_eq!(m[(0, 0)], 0.0);
        let probit = apply_link(&PreferenceMatrix::indifferent(3), Link::Probit, 0.01).unwrap();
        assert!(probit.iter().all(|&v| v == 0.0));
        assert!(apply_link(&p, Link::Logit, 0.5).is_err());
    }

    #[test]
    fn clamping_keeps_certain_outcomes_finite() {
        let p = PreferenceMatrix::from_upper(2, |_, _| 1.0);
        let m = apply_link(&p, Link::Logit, 0.05).unwrap();
        assert!((m[(0, 1)] - (0.95f64 / 0.05).ln()).abs() < 1e-12);
    }

    #[test]
    fn inverse_link_examples() {
        let zero = DMatrix::zeros(4, 4);
        let p = inverse_link(&zero, Link::Logit).unwrap();
        assert!(p.entries().iter().all(|&v| v == 0.5));

        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = 3f64.ln();
        m[(1, 0)] = -(3f64.ln());
        let p = inverse_link(&m, Link::Logit).unwrap();
        assert!((p.get(0, 1) - 0.75).abs() < 1e-15);
        assert!((p.get(1, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn new_rejects_broken_complement() {
        let mut m = DMatrix::from_element(2, 2, 0.5);
        m[(0, 1)] = 0.7;
        assert!(PreferenceMatrix::new(m.clone()).is_err());
        m[(1, 0)] = 0.3;
        assert!(PreferenceMatrix::new(m).is_ok());
    }

    #[test]
    fn ranking_roundtrips_order_and_positions() {
        let r = Ranking::from_order(&[2, 0, 3, 1]).unwrap();
        assert_eq!(r.positions(), &[1, 3, 0, 2]);
        assert_eq!(r.order(), vec![2, 0, 3, 1]);
        assert!(r.ranks_above(2, 1));
        assert!(Ranking::from_order(&[0, 0, 1]).is_err());
        assert!(Ranking::from_positions(vec![0, 3]).is_err());
    }
}
