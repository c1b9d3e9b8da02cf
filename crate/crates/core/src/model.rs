//! The feature low-rank generative model.
//!
//! Item `i` facing item `j` has energy `E_ij = f_i^T w + f_i^T W f_j`, and the
//! lower-energy item is preferred:
//! `P_ij = exp(-E_ij) / (exp(-E_ij) + exp(-E_ji))`. Under the logit link
//! `psi(P) = E^T - E`, which factors as `A^T L A` with `A` the orthogonalized
//! features and `L` a skew-symmetric `d x d` matrix.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, SortedSvd};
use crate::sampling::{seeded_rng, Stream};
use crate::{Error, FeatureSet, Link, PreferenceMatrix, Result};

/// Ground-truth parameters: unary weights `w` and pairwise weights `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlrParams {
    pub unary: DVector<f64>,
    pub pairwise: DMatrix<f64>,
    pub link: Link,
}

impl FlrParams {
    pub fn new(unary: DVector<f64>, pairwise: DMatrix<f64>, link: Link) -> Result<Self> {
        let d = unary.len();
        if pairwise.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "unary weights have length {d}, pairwise weights are {}x{}",
                pairwise.nrows(),
                pairwise.ncols()
            )));
        }
        if unary.iter().chain(pairwise.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite model parameter".into()));
        }
        Ok(Self { unary, pairwise, link })
    }

    pub fn d(&self) -> usize {
        self.unary.len()
    }

    fn check(&self, features: &FeatureSet) -> Result<()> {
        if features.d() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "model dimension {}, feature dimension {}",
                self.d(),
                features.d()
            )));
        }
        Ok(())
    }
}

/// Energy matrix `E = g 1^T + F^T W F` with `g = F^T w`.
pub fn energies(params: &FlrParams, features: &FeatureSet) -> Result<DMatrix<f64>> {
    params.check(features)?;
    let f = features.raw();
    let g = f.transpose() * &params.unary;
    let mut e = f.transpose() * &params.pairwise * f;
    for (i, gi) in g.iter().enumerate() {
        e.row_mut(i).add_scalar_mut(*gi);
    }
    Ok(e)
}

/// Link-scale preferences `psi(P)_ij = E_ji - E_ij`, skew-symmetric by construction.
pub fn link_scores(params: &FlrParams, features: &FeatureSet) -> Result<DMatrix<f64>> {
    let e = energies(params, features)?;
    Ok(e.transpose() - e)
}

/// `P_ij = psi^{-1}(E_ji - E_ij)`; for the logit link this is the logistic
/// energy model evaluated as `1 / (1 + exp(E_ij - E_ji))`.
pub fn flr_preference_matrix(params: &FlrParams, features: &FeatureSet) -> Result<PreferenceMatrix> {
    let s = link_scores(params, features)?;
    Ok(PreferenceMatrix::from_upper(features.n(), |i, j| params.link.inverse(s[(i, j)])))
}

/// Skew-symmetric `d x d` latent matrix with `psi(P) = A^T L A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSkew(DMatrix<f64>);

impl LatentSkew {
    pub fn new(l: DMatrix<f64>) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::DimensionMismatch("latent matrix must be square".into()));
        }
        let scale = l.norm().max(1.0);
        if (&l + l.transpose()).norm() > 1e-10 * scale {
            return Err(Error::InvalidInput("latent matrix is not skew-symmetric".into()));
        }
        Ok(Self(l))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// `A^T L A` for the given orthogonalized features.
    pub fn reconstruct(&self, features: &FeatureSet) -> DMatrix<f64> {
        let a = features.orthogonalized();
        a.transpose() * &self.0 * a
    }
}

/// Relative residual allowed when expressing the all-ones item vector in
/// feature coordinates.
const ONES_TOL: f64 = 1e-8;

/// Computes `L = U^T (c w^T - w c^T + W^T - W) U`, where `c` solves
/// `F^T c = 1`.
///
/// With `F = I` this is `c = 1` and the unary block is `1 w^T - w 1^T`. For
/// general features the unary term `1 g^T - g 1^T` only factors through the
/// features when the constant vector lies in their row space; otherwise
/// [`Error::OnesOutsideRowSpace`] is returned. The pairwise term always
/// factors.
pub fn latent_skew(params: &FlrParams, features: &FeatureSet) -> Result<LatentSkew> {
    params.check(features)?;
    features.require_full_rank()?;
    let u = features.u();
    let w = &params.pairwise;
    let mut core = w.transpose() - w;
    if params.unary.iter().any(|&v| v != 0.0) {
        let n = features.n();
        let ones = DVector::from_element(n, 1.0);
        // F^T = V S U^T, so the least-squares solution is U S^{-1} V^T 1.
        let a = features.orthogonalized();
        let s = features.singular_values();
        let mut coeffs = a * &ones;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c /= s[k] * s[k];
        }
        let c = u * coeffs;
        let residual = (features.raw().transpose() * &c - &ones).norm() / (n as f64).sqrt();
        if residual > ONES_TOL {
            return Err(Error::OnesOutsideRowSpace { residual });
        }
        core += &c * params.unary.transpose() - &params.unary * c.transpose();
    }
    let l = u.transpose() * core * u;
    LatentSkew::new(linalg::skew_part(&l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticModel {
    /// `W = 0`: a feature-based Bradley-Terry instance.
    Model1,
    /// Dense `W` with U(0, 1) entries.
    Model2,
    /// U(0, 1) `W` truncated to its leading singular values.
    Model3,
}

impl SyntheticModel {
    pub const ALL: [SyntheticModel; 3] = [Self::Model1, Self::Model2, Self::Model3];
}

impl fmt::Display for SyntheticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self {
            Self::Model1 => 1,
            Self::Model2 => 2,
            Self::Model3 => 3,
        };
        write!(f, "Model{k}")
    }
}

impl FromStr for SyntheticModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches("model").trim_start_matches('-') {
            "1" => Ok(Self::Model1),
            "2" => Ok(Self::Model2),
            "3" => Ok(Self::Model3),
            _ => Err(Error::Parse(format!("unknown model `{s}` (expected 1, 2 or 3)"))),
        }
    }
}

/// A generated ground-truth instance.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub params: FlrParams,
    pub features: FeatureSet,
    pub preference: PreferenceMatrix,
}

/// Draws `w ~ U(0,1)^d`, then `W` per model, then conditioned features (see
/// [`FeatureSet::conditioned_uniform`]), all from the instance stream of `seed`.
/// `rank` is only used by [`SyntheticModel::Model3`].
pub fn generate_synthetic(
    model: SyntheticModel,
    n: usize,
    d: usize,
    rank: usize,
    seed: u64,
) -> Result<SyntheticInstance> {
    if n < 2 || d == 0 || d > n {
        return Err(Error::InvalidInput(format!("need n >= 2 and 1 <= d <= n, got n={n}, d={d}")));
    }
    if model == SyntheticModel::Model3 && (rank == 0 || rank >= d) {
        return Err(Error::InvalidInput(format!("Model3 needs 1 <= rank < d, got rank={rank}, d={d}")));
    }
    let mut rng = seeded_rng(seed, Stream::Instance);
    use rand::Rng;
    let unary = DVector::from_fn(d, |_, _| rng.random::<f64>());
    let pairwise = match model {
        SyntheticModel::Model1 => DMatrix::zeros(d, d),
        SyntheticModel::Model2 | SyntheticModel::Model3 => {
            let mut w = DMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    w[(r, c)] = rng.random::<f64>();
                }
            }
            if model == SyntheticModel::Model3 {
                let SortedSvd { u, mut singular, v_t } = linalg::svd(&w);
                singular.iter_mut().skip(rank).for_each(|s| *s = 0.0);
                w = u * DMatrix::from_diagonal(&singular) * v_t;
            }
            w
        }
    };
    let features = FeatureSet::conditioned_uniform(d, n, &mut rng)?;
    let params = FlrParams::new(unary, pairwise, Link::Logit)?;
    let preference = flr_preference_matrix(&params, &features)?;
    Ok(SyntheticInstance { params, features, preference })
}
