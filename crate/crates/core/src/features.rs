//! Item feature matrices and their orthogonalized form.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::linalg::{self, SortedSvd};
use crate::{Error, Result};

/// Relative singular-value cutoff below which features count as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// A `d x n` feature matrix `F` (column `i` describes item `i`) together with
/// its thin SVD `F = U S V^T` and the orthogonalized features `A = S V^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    raw: DMatrix<f64>,
    u: DMatrix<f64>,
    singular: DVector<f64>,
    orthogonal: DMatrix<f64>,
}

impl FeatureSet {
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        let (d, n) = raw.shape();
        if d == 0 || n == 0 {
            return Err(Error::InvalidInput(format!("empty feature matrix ({d}x{n})")));
        }
        if d > n {
            return Err(Error::InvalidInput(format!(
                "feature dimension {d} exceeds item count {n}"
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        let SortedSvd { u, singular, v_t } = linalg::svd(&raw);
        let orthogonal = DMatrix::from_diagonal(&singular) * v_t;
        Ok(Self { raw, u, singular, orthogonal })
    }

    /// `F = I_n`: every item is its own feature.
    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity features are valid")
    }

    /// Random well-conditioned features.
    ///
    /// The first feature is the constant 1 and the remaining entries are drawn
    /// from U(0, 1); all singular values are then set to 1, which keeps the
    /// row space (and hence the constant direction) while forcing `kappa = 1`.
    pub fn conditioned_uniform<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::InvalidInput(format!("need 1 <= d <= n, got d={d}, n={n}")));
        }
        let mut raw = DMatrix::zeros(d, n);
        for r in 0..d {
            for c in 0..n {
                raw[(r, c)] = if r == 0 { 1.0 } else { rng.random::<f64>() };
            }
        }
        let SortedSvd { u, v_t, .. } = linalg::svd(&raw);
        Self::new(u * v_t)
    }

    pub fn d(&self) -> usize {
        self.raw.nrows()
    }

    pub fn n(&self) -> usize {
        self.raw.ncols()
    }

    pub fn raw(&self) -> &DMatrix<f64> {
        &self.raw
    }

    /// Left singular vectors `U` (`d x d`).
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular
    }

    /// `A = S V^T`, a `d x n` matrix with orthogonal rows and `F = U A`.
    pub fn orthogonalized(&self) -> &DMatrix<f64> {
        &self.orthogonal
    }

    /// Inverse condition number `sigma_min / sigma_max`.
    pub fn kappa(&self) -> f64 {
        let top = self.singular[0];
        if top == 0.0 {
            0.0
        } else {
            self.singular[self.singular.len() - 1] / top
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.kappa() > RANK_TOL
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::RankDeficientFeatures { kappa: self.kappa() })
        }
    }

    /// Feature column of item `i`.
    pub fn item(&self, i: usize) -> DVector<f64> {
        self.raw.column(i).into_owned()
    }

    /// Features with items reordered: new item `a` is old item `perm[a]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let raw = DMatrix::from_fn(self.d(), self.n(), |r, c| self.raw[(r, perm[c])]);
        Self::new(raw)
    }
}
