//! Small dense symmetric matrices.
//!
//! Hot Monte Carlo loops factor row-major `n×n` slices in place; everything
//! else goes through `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};

/// In-place upper Cholesky `A = RᵀR` of a row-major symmetric matrix.
/// Only the upper triangle of `a` is read. Returns `false` as soon as a
/// pivot is not strictly positive; the lower triangle is zeroed on success.
pub fn cholesky_upper_in_place(a: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for k in 0..n {
        let mut d = a[k * n + k];
        for p in 0..k {
            d -= a[p * n + k] * a[p * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let rkk = d.sqrt();
        a[k * n + k] = rkk;
        for j in k + 1..n {
            let mut s = a[k * n + j];
            for p in 0..k {
                s -= a[p * n + k] * a[p * n + j];
            }
            a[k * n + j] = s / rkk;
        }
    }
    for i in 1..n {
        for j in 0..i {
            a[i * n + j] = 0.0;
        }
    }
    true
}

/// Upper Cholesky factor of a symmetric matrix, or `None` if it is not
/// positive definite.
pub fn cholesky_upper(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let mut buf: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
    if !cholesky_upper_in_place(&mut buf, n) {
        return None;
    }
    Some(DMatrix::from_row_slice(n, n, &buf))
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `ln det` of a symmetric positive definite matrix.
pub fn ln_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let r = cholesky_upper(m)?;
    Some(2.0 * (0..r.nrows()).map(|i| r[(i, i)].ln()).sum::<f64>())
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
