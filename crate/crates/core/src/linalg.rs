//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Thin SVD with singular values sorted in decreasing order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> SortedSvd {
    // faer's blocked SVD is several times faster than nalgebra's on the n x n
    // iterates of plain matrix completion.
    if let Ok(raw) = to_faer(m).thin_svd() {
        let (u, s, v) = (raw.U(), raw.S().column_vector(), raw.V());
        return SortedSvd {
            u: DMatrix::from_fn(u.nrows(), u.ncols(), |r, c| u[(r, c)]),
            singular: DVector::from_fn(s.nrows(), |k, _| s[k]),
            v_t: DMatrix::from_fn(v.ncols(), v.nrows(), |r, c| v[(c, r)]),
        };
    }
    let raw = m.clone().svd(true, true);
    let u = raw.u.expect("u requested");
    let v_t = raw.v_t.expect("v_t requested");
    let s = raw.singular_values;
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    SortedSvd {
        u: DMatrix::from_fn(u.nrows(), idx.len(), |r, c| u[(r, idx[c])]),
        singular: DVector::from_fn(idx.len(), |c, _| s[idx[c]]),
        v_t: DMatrix::from_fn(idx.len(), v_t.ncols(), |r, c| v_t[(idx[r], c)]),
    }
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(m)
        .singular_values()
        .unwrap_or_else(|_| m.singular_values().iter().copied().collect());
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > rel_tol * top).count(),
        _ => 0,
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    singular_values(m).iter().sum()
}

/// Moore-Penrose pseudoinverse, dropping singular values below
/// `rel_tol * sigma_max`.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let SortedSvd { u, singular, v_t } = svd(m);
    let cut = singular.get(0).copied().unwrap_or(0.0) * rel_tol;
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for k in 0..singular.len() {
        if singular[k] > cut {
            out += v_t.row(k).transpose() * u.column(k).transpose() / singular[k];
        }
    }
    out
}

pub fn skew_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

pub fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
