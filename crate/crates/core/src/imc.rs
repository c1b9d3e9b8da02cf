//! Trace-norm regularized inductive matrix completion.
//!
//! Minimizes
//!
//! ```text
//! || R(T - A^T Z_L A - Z_N) ||_F^2 + lambda_L ||Z_L||_* + lambda_N ||Z_N||_*
//! ```
//!
//! over the `d x d` latent `Z_L` and, optionally, an `n x n` noise matrix
//! `Z_N` supported on the observed entries, where `R` keeps the observed
//! entries only. The solver is proximal gradient descent: a gradient step on
//! the squared residual followed by singular-value soft-thresholding.

use std::io::Write;

use nalgebra::DMatrix;

use crate::dataset::Mask;
use crate::features::RANK_TOL;
use crate::linalg::{self, SortedSvd};
use crate::{Error, Result};

/// The feature operator `Z -> A^T Z A`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// `A = I_n`: plain (transductive) matrix completion.
    Identity(usize),
    /// A `d x n` feature matrix.
    Matrix(DMatrix<f64>),
}

impl FeatureMap {
    pub fn n(&self) -> usize {
        match self {
            FeatureMap::Identity(n) => *n,
            FeatureMap::Matrix(a) => a.ncols(),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            FeatureMap::Identity(n) => *n,
            FeatureMap::Matrix(a) => a.nrows(),
        }
    }

    pub fn spectral_norm(&self) -> f64 {
        match self {
            FeatureMap::Identity(_) => 1.0,
            FeatureMap::Matrix(a) => linalg::spectral_norm(a),
        }
    }

    /// `A^T Z A`.
    pub fn lift(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            FeatureMap::Identity(_) => z.clone(),
            FeatureMap::Matrix(a) => a.transpose() * (z * a),
        }
    }

    /// `(A^T Z A)_ij` on the mask entries, in mask order.
    fn masked_values(&self, z: &DMatrix<f64>, mask: &Mask) -> Vec<f64> {
        match self {
            FeatureMap::Identity(_) => mask.entries().iter().map(|&(i, j)| z[(i, j)]).collect(),
            FeatureMap::Matrix(a) => {
                let za = z * a;
                mask.entries().iter().map(|&(i, j)| a.column(i).dot(&za.column(j))).collect()
            }
        }
    }

    /// `A R A^T` for a matrix `R` supported on the mask.
    fn pull_back(&self, mask: &Mask, values: &[f64]) -> DMatrix<f64> {
        match self {
            FeatureMap::Identity(n) => scatter(*n, mask, values),
            FeatureMap::Matrix(a) => {
                let mut b = DMatrix::zeros(a.nrows(), a.ncols());
                for (&(i, j), &r) in mask.entries().iter().zip(values) {
                    b.column_mut(j).axpy(r, &a.column(i), 1.0);
                }
                b * a.transpose()
            }
        }
    }
}

fn scatter(n: usize, mask: &Mask, values: &[f64]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for (&(i, j), &v) in mask.entries().iter().zip(values) {
        out[(i, j)] = v;
    }
    out
}

fn restrict(m: &DMatrix<f64>, mask: &Mask) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for &(i, j) in mask.entries() {
        out[(i, j)] = m[(i, j)];
    }
    out
}

/// Target matrix, its observed entries, and the feature operator.
#[derive(Debug, Clone)]
pub struct ImcProblem {
    target: DMatrix<f64>,
    mask: Mask,
    features: FeatureMap,
}

impl ImcProblem {
    pub fn new(target: DMatrix<f64>, mask: Mask, features: FeatureMap) -> Result<Self> {
        let n = features.n();
        if target.shape() != (n, n) || mask.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "target {}x{}, mask over {}, features over {n} items",
                target.nrows(),
                target.ncols(),
                mask.n()
            )));
        }
        if mask.is_empty() {
            return Err(Error::InvalidInput("no observed entries".into()));
        }
        if let FeatureMap::Matrix(a) = &features {
            let s = linalg::singular_values(a);
            let kappa = if s[0] > 0.0 { s[s.len() - 1] / s[0] } else { 0.0 };
            if a.nrows() > n || kappa <= RANK_TOL {
                return Err(Error::RankDeficientFeatures { kappa });
            }
        }
        if mask.entries().iter().any(|&(i, j)| !target[(i, j)].is_finite()) {
            return Err(Error::InvalidInput("non-finite observed target entry".into()));
        }
        Ok(Self { target, mask, features })
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.target
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    fn observed_target(&self) -> Vec<f64> {
        self.mask.entries().iter().map(|&(i, j)| self.target[(i, j)]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// Constant step `1 / (2 L)` with `L` the operator-norm bound of the data term.
    #[default]
    Fixed,
    /// Step halving until the proximal sufficient-decrease test passes.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImcConfig {
    pub lambda_l: f64,
    pub lambda_n: f64,
    pub max_iters: usize,
    /// Stop once the relative objective change drops below this.
    pub tol: f64,
    pub step_rule: StepRule,
    /// Overrides the default (fixed) or initial (backtracking) step.
    pub step: Option<f64>,
    pub use_noise_term: bool,
}

impl Default for ImcConfig {
    fn default() -> Self {
        Self {
            lambda_l: 1e-2,
            lambda_n: 1e2,
            max_iters: 2000,
            tol: 1e-8,
            step_rule: StepRule::Fixed,
            step: None,
            use_noise_term: false,
        }
    }
}

impl ImcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_l > 0.0) || !(self.lambda_n >= 0.0) || !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need lambda_L > 0, lambda_N >= 0, tol > 0 (got {}, {}, {})",
                self.lambda_l, self.lambda_n, self.tol
            )));
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidInput(format!("step size {step} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ImcSolution {
    pub z_l: DMatrix<f64>,
    /// Zero when the noise term is disabled.
    pub z_n: DMatrix<f64>,
    /// `A^T Z_L A + Z_N`.
    pub completed: DMatrix<f64>,
    /// Objective at the starting point followed by one value per iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub final_step: f64,
}

impl ImcSolution {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the starting objective")
    }

    /// Writes `iteration,objective` rows.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "objective"])?;
        for (k, v) in self.objective_trace.iter().enumerate() {
            w.write_record([k.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Singular-value soft-thresholding, the proximal map of `threshold * ||.||_*`.
pub fn svt(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    svt_with_norm(m, threshold).0
}

/// Returns the thresholded matrix and its nuclear norm.
fn svt_with_norm(m: &DMatrix<f64>, threshold: f64) -> (DMatrix<f64>, f64) {
    if m.iter().all(|&v| v == 0.0) {
        return (m.clone(), 0.0);
    }
    let SortedSvd { u, singular, v_t } = linalg::svd(m);
    let kept: Vec<f64> = singular.iter().map(|s| (s - threshold).max(0.0)).take_while(|&s| s > 0.0).collect();
    let k = kept.len();
    if k == 0 {
        return (DMatrix::zeros(m.nrows(), m.ncols()), 0.0);
    }
    let mut left = u.columns(0, k).into_owned();
    for (c, s) in kept.iter().enumerate() {
        left.column_mut(c).scale_mut(*s);
    }
    (left * v_t.rows(0, k), kept.iter().sum())
}

/// Best rank-`r` approximation in Frobenius norm.
pub fn truncate_rank(m: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let full = m.nrows().min(m.ncols());
    if r == 0 || r > full {
        return Err(Error::InvalidInput(format!("target rank {r} outside 1..={full}")));
    }
    if r == full {
        return Ok(m.clone());
    }
    let SortedSvd { u, singular, v_t } = linalg::svd(m);
    let mut left = u.columns(0, r).into_owned();
    for c in 0..r {
        left.column_mut(c).scale_mut(singular[c]);
    }
    Ok(left * v_t.rows(0, r))
}

/// Exact objective value at `(z_l, z_n)`. The noise penalty is included only
/// when the noise term is enabled.
pub fn objective(problem: &ImcProblem, z_l: &DMatrix<f64>, z_n: &DMatrix<f64>, config: &ImcConfig) -> f64 {
    let fitted = problem.features.masked_values(z_l, &problem.mask);
    let residual: f64 = problem
        .mask
        .entries()
        .iter()
        .zip(&fitted)
        .map(|(&(i, j), f)| {
            let r = problem.target[(i, j)] - f - z_n[(i, j)];
            r * r
        })
        .sum();
    let mut value = residual + config.lambda_l * linalg::nuclear_norm(z_l);
    if config.use_noise_term {
        value += config.lambda_n * linalg::nuclear_norm(z_n);
    }
    value
}

struct Iterate {
    z_l: DMatrix<f64>,
    z_n: Option<DMatrix<f64>>,
    residual: Vec<f64>,
    smooth: f64,
    objective: f64,
}

impl Iterate {
    fn new(
        problem: &ImcProblem,
        observed: &[f64],
        z_l: DMatrix<f64>,
        nuc_l: f64,
        z_n: Option<DMatrix<f64>>,
        config: &ImcConfig,
    ) -> Self {
        let fitted = problem.features.masked_values(&z_l, &problem.mask);
        let residual: Vec<f64> = match &z_n {
            Some(zn) => problem
                .mask
                .entries()
                .iter()
                .zip(observed.iter().zip(&fitted))
                .map(|(&(i, j), (t, f))| t - f - zn[(i, j)])
                .collect(),
            None => observed.iter().zip(&fitted).map(|(t, f)| t - f).collect(),
        };
        let smooth = residual.iter().map(|r| r * r).sum::<f64>();
        let nuc_n = z_n.as_ref().map_or(0.0, linalg::nuclear_norm);
        let objective = smooth + config.lambda_l * nuc_l + config.lambda_n * nuc_n;
        Self { z_l, z_n, residual, smooth, objective }
    }
}

const DIVERGENCE_RUN: usize = 10;
const MIN_STEP: f64 = 1e-20;

/// Proximal gradient descent from `Z_L = 0, Z_N = 0`.
pub fn solve_imc(problem: &ImcProblem, config: &ImcConfig) -> Result<ImcSolution> {
    config.validate()?;
    let n = problem.features.n();
    let d = problem.features.d();
    let observed = problem.observed_target();
    let noise = config.use_noise_term;

    // The data term's gradient is 2 * (op^T op) with ||op||^2 <= ||A||^4 (+1 with noise).
    let norm = problem.features.spectral_norm();
    let lipschitz = 2.0 * (norm.powi(4) + if noise { 1.0 } else { 0.0 });
    let mut step = config.step.unwrap_or(match config.step_rule {
        StepRule::Fixed => 1.0 / lipschitz,
        StepRule::Backtracking => 1.0,
    });

    let mut current = Iterate::new(problem, &observed, DMatrix::zeros(d, d), 0.0, noise.then(|| DMatrix::zeros(n, n)), config);
    if !current.objective.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut trace = vec![current.objective];
    let mut increases = 0usize;
    let mut iterations = 0usize;

    while iterations < config.max_iters {
        // Descent direction -grad / 2 for each block.
        let dir_l = problem.features.pull_back(&problem.mask, &current.residual);
        let dir_n = noise.then(|| scatter(n, &problem.mask, &current.residual));

        let propose = |t: f64| -> Iterate {
            let (z_l, nuc_l) = svt_with_norm(&(&current.z_l + &dir_l * (2.0 * t)), t * config.lambda_l);
            let z_n = current.z_n.as_ref().zip(dir_n.as_ref()).map(|(zn, dn)| {
                let (shrunk, _) = svt_with_norm(&(zn + dn * (2.0 * t)), t * config.lambda_n);
                restrict(&shrunk, &problem.mask)
            });
            Iterate::new(problem, &observed, z_l, nuc_l, z_n, config)
        };

        let next = match config.step_rule {
            StepRule::Fixed => propose(step),
            StepRule::Backtracking => loop {
                let cand = propose(step);
                let delta_l = &cand.z_l - &current.z_l;
                let mut inner = -2.0 * dir_l.dot(&delta_l);
                let mut dist2 = delta_l.norm_squared();
                if let (Some(new_n), Some(old_n), Some(dn)) = (&cand.z_n, &current.z_n, &dir_n) {
                    let delta_n = new_n - old_n;
                    inner -= 2.0 * dn.dot(&delta_n);
                    dist2 += delta_n.norm_squared();
                }
                let slack = 1e-12 * current.objective.abs().max(1.0);
                let model = current.smooth + inner + dist2 / (2.0 * step);
                if cand.smooth <= model + slack && cand.objective <= current.objective {
                    break cand;
                }
                step *= 0.5;
                if step < MIN_STEP {
                    // No descent possible at machine precision: treat as converged.
                    log::debug!("backtracking exhausted at iteration {iterations}");
                    return Ok(finish(problem, current, trace, iterations, step));
                }
            },
        };
        iterations += 1;
        if !next.objective.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: iterations });
        }
        let prev = current.objective;
        if next.objective > prev {
            increases += 1;
            if increases >= DIVERGENCE_RUN {
                return Err(Error::Diverged { iterations });
            }
        } else {
            increases = 0;
        }
        trace.push(next.objective);
        current = next;
        let change = (prev - current.objective).abs();
        if change <= config.tol * prev.abs() || (prev == 0.0 && current.objective == 0.0) {
            break;
        }
    }
    Ok(finish(problem, current, trace, iterations, step))
}

fn finish(problem: &ImcProblem, it: Iterate, trace: Vec<f64>, iterations: usize, step: f64) -> ImcSolution {
    let n = problem.features.n();
    let z_n = it.z_n.unwrap_or_else(|| DMatrix::zeros(n, n));
    let completed = problem.features.lift(&it.z_l) + &z_n;
    ImcSolution { z_l: it.z_l, z_n, completed, objective_trace: trace, iterations, final_step: step }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FeatureSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn svt_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_matrix(5, 5, &mut rng);
        assert!((svt(&m, 0.0) - &m).norm() < 1e-12);
        let top = linalg::spectral_norm(&m);
        assert_eq!(svt(&m, top).norm(), 0.0);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0]));
        let out = svt(&diag, 2.0);
        assert!((out - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]))).norm() < 1e-14);
    }

    #[test]
    fn truncate_examples() {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0]));
        assert_eq!(truncate_rank(&diag, 2).unwrap(), diag);
        let out = truncate_rank(&diag, 1).unwrap();
        assert!((out - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.0]))).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_matrix(6, 2, &mut rng);
        let y = random_matrix(6, 2, &mut rng);
        let low = &x * y.transpose();
        assert!((truncate_rank(&low, 2).unwrap() - &low).norm() < 1e-10);
        assert!(truncate_rank(&low, 0).is_err());
        assert!(truncate_rank(&low, 7).is_err());
    }

    fn planted(d: usize, n: usize, rank: usize, seed: u64) -> (FeatureSet, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = FeatureSet::conditioned_uniform(d, n, &mut rng).unwrap();
        let x = random_matrix(d, rank, &mut rng);
        let y = random_matrix(d, rank, &mut rng);
        let l = &x * y.transpose() - &y * x.transpose();
        (f, l)
    }

    #[test]
    fn zero_target_gives_zero_solution() {
        let (f, _) = planted(4, 12, 1, 3);
        let problem = ImcProblem::new(
            DMatrix::zeros(12, 12),
            Mask::off_diagonal(12),
            FeatureMap::Matrix(f.orthogonalized().clone()),
        )
        .unwrap();
        let sol = solve_imc(&problem, &ImcConfig::default()).unwrap();
        assert!(sol.z_l.norm() < 1e-8);
        assert_eq!(sol.objective(), 0.0);
    }

    #[test]
    fn objective_examples() {
        let (f, l) = planted(4, 15, 2, 4);
        let a = f.orthogonalized().clone();
        let target = a.transpose() * &l * &a;
        let mask = Mask::off_diagonal(15);
        let problem = ImcProblem::new(target.clone(), mask.clone(), FeatureMap::Matrix(a)).unwrap();
        let cfg = ImcConfig { lambda_l: 0.3, ..ImcConfig::default() };
        let zero_n = DMatrix::zeros(15, 15);
        let at_zero = objective(&problem, &DMatrix::zeros(4, 4), &zero_n, &cfg);
        let observed: f64 = mask.entries().iter().map(|&(i, j)| target[(i, j)].powi(2)).sum();
        assert!((at_zero - observed).abs() < 1e-12 * observed);
        let at_truth = objective(&problem, &l, &zero_n, &cfg);
        assert!((at_truth - 0.3 * linalg::nuclear_norm(&l)).abs() < 1e-10);
    }

    #[test]
    fn fixed_step_recovers_planted_latent() {
        let (f, l) = planted(6, 30, 2, 5);
        let a = f.orthogonalized().clone();
        let target = a.transpose() * &l * &a;
        let problem = ImcProblem::new(target, Mask::off_diagonal(30), FeatureMap::Matrix(a)).unwrap();
        let cfg = ImcConfig { lambda_l: 1e-6, max_iters: 500, ..ImcConfig::default() };
        let sol = solve_imc(&problem, &cfg).unwrap();
        assert!((&sol.z_l - &l).norm() / l.norm() < 1e-3);
    }

    #[test]
    fn backtracking_handles_unscaled_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let raw = DMatrix::from_fn(3, 20, |_, _| rng.random::<f64>() * 3.0);
        let f = FeatureSet::new(raw).unwrap();
        let x = random_matrix(3, 1, &mut rng);
        let y = random_matrix(3, 1, &mut rng);
        let l = &x * y.transpose() - &y * x.transpose();
        let a = f.orthogonalized().clone();
        let problem = ImcProblem::new(a.transpose() * &l * &a, Mask::off_diagonal(20), FeatureMap::Matrix(a)).unwrap();
        let cfg = ImcConfig { lambda_l: 1e-6, step_rule: StepRule::Backtracking, max_iters: 5000, tol: 1e-14, ..ImcConfig::default() };
        let sol = solve_imc(&problem, &cfg).unwrap();
        assert!(sol.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].max(1.0)));
        assert!((&sol.z_l - &l).norm() / l.norm() < 1e-3, "{}", (&sol.z_l - &l).norm() / l.norm());
    }

    #[test]
    fn oversized_fixed_step_reports_divergence() {
        let (f, l) = planted(4, 16, 2, 7);
        let a = f.orthogonalized().clone();
        let problem = ImcProblem::new(a.transpose() * &l * &a, Mask::off_diagonal(16), FeatureMap::Matrix(a)).unwrap();
        let cfg = ImcConfig { step: Some(5.0), ..ImcConfig::default() };
        assert!(matches!(solve_imc(&problem, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn noise_term_stays_on_mask() {
        let (f, l) = planted(3, 10, 1, 8);
        let a = f.orthogonalized().clone();
        let mut target = a.transpose() * &l * &a;
        target[(0, 1)] += 5.0;
        target[(1, 0)] -= 5.0;
        // Enough pairs that Z_L alone cannot absorb the outlier.
        let pairs = crate::sampling::all_pairs(10).into_iter().filter(|&p| p != (2, 3));
        let mask = Mask::from_pairs(10, pairs).unwrap();
        let problem = ImcProblem::new(target, mask.clone(), FeatureMap::Matrix(a)).unwrap();
        let cfg = ImcConfig { use_noise_term: true, lambda_n: 1.0, step_rule: StepRule::Backtracking, ..ImcConfig::default() };
        let sol = solve_imc(&problem, &cfg).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                if !mask.contains(i, j) {
                    assert_eq!(sol.z_n[(i, j)], 0.0);
                }
            }
        }
        assert!(sol.z_n.norm() > 0.0);
        assert!(sol.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].max(1.0)));
    }

    #[test]
    fn problem_validation() {
        let f = FeatureMap::Identity(3);
        assert!(ImcProblem::new(DMatrix::zeros(3, 3), Mask::new(3, vec![]).unwrap(), f.clone()).is_err());
        assert!(ImcProblem::new(DMatrix::zeros(2, 2), Mask::off_diagonal(3), f).is_err());
        let flat = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert!(matches!(
            ImcProblem::new(DMatrix::zeros(3, 3), Mask::off_diagonal(3), FeatureMap::Matrix(flat)),
            Err(Error::RankDeficientFeatures { .. })
        ));
        let bad = ImcConfig { lambda_l: 0.0, ..ImcConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let problem = ImcProblem::new(DMatrix::zeros(3, 3), Mask::off_diagonal(3), FeatureMap::Identity(3)).unwrap();
        let sol = solve_imc(&problem, &ImcConfig::default()).unwrap();
        let mut buf = Vec::new();
        sol.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,objective\n0,0\n"));
    }
}
