//! Small dense helpers on top of nalgebra: general complex eigenvalues and
//! eigenvector bases for (possibly degenerate) clusters.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

use crate::error::{Error, Result};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// All eigenvalues of a square complex matrix, sorted by (Re, Im).
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolverFailure);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(Error::EigensolverFailure)?;
    let ev = schur.eigenvalues().ok_or(Error::EigensolverFailure)?;
    let mut out: Vec<C64> = ev.iter().copied().collect();
    sort_by_re_im(&mut out);
    Ok(out)
}

pub fn sort_by_re_im(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest absolute entry, used to scale tolerances.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// An orthonormal basis of the `dim`-dimensional approximate null space of
/// `m - lambda I`, taken from the smallest right singular vectors.
pub fn eigenspace(m: &DMatrix<C64>, lambda: C64, dim: usize) -> Vec<DVector<C64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::<C64>::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = match svd.v_t {
        Some(v) => v,
        None => return Vec::new(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order
        .into_iter()
        .take(dim)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

/// Groups a sorted eigenvalue list into clusters of numerically equal values.
pub fn clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut used = alloc::vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        let mut c = alloc::vec![i];
        used[i] = true;
        for j in (i + 1)..values.len() {
            if !used[j] && (values[j] - values[i]).norm() <= tol {
                used[j] = true;
                c.push(j);
            }
        }
        out.push(c);
    }
    out
}

/// Eigenvalues of a Hermitian matrix in ascending order with eigenvectors as
/// columns.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}
