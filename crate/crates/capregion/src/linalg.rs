//! Deterministic dense linear algebra helpers.
//!
//! Thin wrappers over nalgebra's symmetric eigendecomposition and SVD that
//! pin an ordering and a sign convention, so repeated runs (and runs under
//! different thread counts) produce bit-identical results.

use nalgebra::{DMatrix, DVector};

/// Symmetric eigendecomposition with eigenvalues sorted descending and the
/// eigenvector matrix permuted to match. Ties keep the eigensolver's
/// original relative order, and each eigenvector's first component of
/// significant magnitude is made positive.
pub fn sym_eigen_desc(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    let eig = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        vecs.set_column(dst, &col);
    }
    (vals, vecs)
}

/// SVD with singular values sorted descending and a deterministic sign
/// convention: the first significant component of each left singular vector
/// is positive, with the matching right vector flipped in tandem so the
/// product U * S * V^T is unchanged.
pub fn svd_desc(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u_raw = svd.u.expect("left singular vectors requested");
    let vt_raw = svd.v_t.expect("right singular vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut s = DVector::zeros(k);
    let mut u = DMatrix::zeros(u_raw.nrows(), k);
    let mut v = DMatrix::zeros(vt_raw.ncols(), k);
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = svd.singular_values[src];
        let mut ucol = u_raw.column(src).clone_owned();
        let mut vcol = vt_raw.row(src).transpose();
        if needs_flip(&ucol) {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        u.set_column(dst, &ucol);
        v.set_column(dst, &vcol);
    }
    (u, s, v)
}

/// Builds `f(A)` for symmetric `A` from a precomputed eigendecomposition:
/// `V * diag(f(lambda)) * V^T`.
pub fn sym_function(
    vals: &DVector<f64>,
    vecs: &DMatrix<f64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let fj = f(vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    &scaled * vecs.transpose()
}

/// Relative Frobenius distance `|a - b|_F / max(|a|_F, tiny)`.
pub fn frob_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = a.norm().max(1e-300);
    diff / scale
}

fn fix_sign(col: &mut DVector<f64>) {
    if needs_flip(col) {
        col.neg_mut();
    }
}

fn needs_flip(col: &DVector<f64>) -> bool {
    let max = col.amax();
    let tol = 1e-12 * max.max(1e-300);
    for &c in col.iter() {
        if c.abs() > tol {
            return c < 0.0;
        }
    }
    false
}

// ---------------------------------------------------------------------------
