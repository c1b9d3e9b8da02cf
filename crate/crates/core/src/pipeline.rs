//! End-to-end ranking: empirical matrix, link transform, completion,
//! inverse link, Copeland aggregation.

use nalgebra::{DMatrix, DVector};

use crate::aggregate::{copeland, CopelandScores};
use crate::imc::{self, FeatureMap, ImcConfig, ImcProblem, ImcSolution};
use crate::preference::inverse_link;
use crate::{ComparisonDataset, Error, FeatureSet, Link, PreferenceMatrix, Ranking, Result};

/// How observed win rates are kept away from 0 and 1 before the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clamp {
    /// `1 / (2 * trials)` for each pair.
    PerPair,
    Fixed(f64),
}

impl Clamp {
    pub fn level(self, trials: u64) -> f64 {
        match self {
            Clamp::PerPair => 1.0 / (2.0 * trials as f64),
            Clamp::Fixed(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IprConfig {
    pub link: Link,
    /// Rank of the spectral truncation applied to the completed matrix;
    /// `None` skips truncation.
    pub rank: Option<usize>,
    pub imc: ImcConfig,
    pub clamp: Clamp,
}

impl IprConfig {
    pub fn new(link: Link) -> Self {
        Self { link, rank: None, imc: ImcConfig::default(), clamp: Clamp::PerPair }
    }
}

impl Default for IprConfig {
    fn default() -> Self {
        Self::new(Link::Logit)
    }
}

#[derive(Debug, Clone)]
pub struct RankingOutcome {
    pub ranking: Ranking,
    pub scores: CopelandScores,
    /// The completed preference matrix `Q`.
    pub completed: PreferenceMatrix,
    pub solution: ImcSolution,
}

/// Clamped link transform of the observed win rates; zero elsewhere.
pub fn link_target(data: &ComparisonDataset, link: Link, clamp: Clamp) -> Result<DMatrix<f64>> {
    let n = data.n();
    let mut target = DMatrix::zeros(n, n);
    for c in data.pairs() {
        let level = clamp.level(c.trials);
        if !(level > 0.0 && level < 0.5) {
            return Err(Error::InvalidInput(format!("clamp level {level} outside (0, 1/2)")));
        }
        let v = link.forward(c.rate().clamp(level, 1.0 - level));
        target[(c.i, c.j)] = v;
        target[(c.j, c.i)] = -v;
    }
    Ok(target)
}

fn run(data: &ComparisonDataset, config: &IprConfig, features: FeatureMap) -> Result<RankingOutcome> {
    let n = data.n();
    if let Some(r) = config.rank {
        if r == 0 || r > n {
            return Err(Error::InvalidInput(format!("target rank {r} outside 1..={n}")));
        }
    }
    let target = link_target(data, config.link, config.clamp)?;
    let problem = ImcProblem::new(target, data.mask(), features)?;
    let solution = imc::solve_imc(&problem, &config.imc)?;
    let link_matrix = match config.rank {
        Some(r) => imc::truncate_rank(&solution.completed, r)?,
        None => solution.completed.clone(),
    };
    let completed = inverse_link(&link_matrix, config.link)?;
    let (ranking, scores) = copeland(&completed);
    Ok(RankingOutcome { ranking, scores, completed, solution })
}

/// Inductive pairwise ranking with the dataset's features.
pub fn ipr(data: &ComparisonDataset, config: &IprConfig) -> Result<RankingOutcome> {
    let features = data.features();
    features.require_full_rank()?;
    run(data, config, FeatureMap::Matrix(features.orthogonalized().clone()))
}

/// The same pipeline with identity features, i.e. feature-free low-rank
/// completion of the link-transformed matrix.
pub fn lrpr_baseline(data: &ComparisonDataset, config: &IprConfig) -> Result<RankingOutcome> {
    run(data, config, FeatureMap::Identity(data.n()))
}

/// Link-scale preference of an unseen item `a` over `b`, `f_a^T U Z_L U^T f_b`,
/// from an IPR solution fitted on `features`.
pub fn predict_link_value(solution: &ImcSolution, features: &FeatureSet, f_a: &DVector<f64>, f_b: &DVector<f64>) -> f64 {
    let u = features.u();
    let a = u.transpose() * f_a;
    let b = u.transpose() * f_b;
    a.dot(&(&solution.z_l * b))
}
