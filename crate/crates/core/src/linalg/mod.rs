//! Dense Hermitian eigensolvers with a fixed ordering and phase convention.
//!
//! Every eigenvector handed out by this crate obeys the same global-phase
//! convention: the largest-magnitude coefficient is made real and positive
//! (ties broken by the lowest index). Degenerate eigenvalues are ordered by
//! the index of the largest-magnitude coefficient so repeated runs and
//! different backends agree on the labelling.

pub mod lanczos;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub use lanczos::{lanczos_lowest, HermitianOp, LanczosConfig, SparseHermitian};

/// Relative tolerance used to detect non-Hermitian input.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Rotate `v` so its largest-magnitude entry is real positive.
/// Ties in magnitude are resolved toward the lowest index.
pub fn fix_phase(v: &mut Array1<Complex64>) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, c) in v.iter().enumerate() {
        let m = c.norm();
        if m > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = m;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        let rot = phase.conj();
        v.mapv_inplace(|c| c * rot);
        // kill the residual imaginary part on the anchor entry
        v[best] = Complex64::new(v[best].norm(), 0.0);
    }
}

fn argmax_magnitude(v: &Array1<Complex64>) -> usize {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, c) in v.iter().enumerate() {
        let m = c.norm();
        if m > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = m;
        }
    }
    best
}

/// Reorder eigenpairs: ascending eigenvalue, ties (within `tie_tol`) sorted by
/// the index of the largest-magnitude coefficient.
fn order_pairs(values: &mut [f64], vectors: &mut [Array1<Complex64>], tie_tol: f64) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let anchors: Vec<usize> = vectors.iter().map(argmax_magnitude).collect();
    idx.sort_by(|&a, &b| {
        if (values[a] - values[b]).abs() <= tie_tol {
            anchors[a].cmp(&anchors[b])
        } else {
            values[a].partial_cmp(&values[b]).unwrap()
        }
    });
    let new_values: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let new_vectors: Vec<Array1<Complex64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
    values.copy_from_slice(&new_values);
    for (dst, src) in vectors.iter_mut().zip(new_vectors) {
        *dst = src;
    }
}

fn matrix_scale_real(h: &Array2<f64>) -> f64 {
    h.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0)
}

fn matrix_scale_complex(h: &Array2<Complex64>) -> f64 {
    h.iter().fold(0.0f64, |m, x| m.max(x.norm())).max(1.0)
}

/// Lowest `k` eigenpairs of a real symmetric matrix, complex-typed vectors.
pub fn eigh_real_lowest(h: &Array2<f64>, k: usize) -> Result<(Vec<f64>, Vec<Array1<Complex64>>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(CoreError::ShapeMismatch(format!(
            "expected square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if k > n {
        return Err(CoreError::InvalidParameter(format!(
            "requested {k} eigenpairs from a dimension-{n} matrix"
        )));
    }
    let scale = matrix_scale_real(h);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((h[[i, j]] - h[[j, i]]).abs());
        }
    }
    if asym > HERMITICITY_TOL * scale {
        return Err(CoreError::NotHermitian {
            asymmetry: asym,
            tolerance: HERMITICITY_TOL * scale,
        });
    }
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::EigenSolve(e.to_string()))?;
    let mut values: Vec<f64> = vals.iter().take(k).copied().collect();
    let mut vectors: Vec<Array1<Complex64>> = (0..k)
        .map(|q| vecs.column(q).mapv(Complex64::from))
        .collect();
    for v in vectors.iter_mut() {
        fix_phase(v);
    }
    order_pairs(&mut values, &mut vectors, 1e-12 * scale);
    Ok((values, vectors))
}

/// Lowest `k` eigenpairs of a complex Hermitian matrix.
pub fn eigh_complex_lowest(
    h: &Array2<Complex64>,
    k: usize,
) -> Result<(Vec<f64>, Vec<Array1<Complex64>>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(CoreError::ShapeMismatch(format!(
            "expected square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if k > n {
        return Err(CoreError::InvalidParameter(format!(
            "requested {k} eigenpairs from a dimension-{n} matrix"
        )));
    }
    let scale = matrix_scale_complex(h);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i..n {
            asym = asym.max((h[[i, j]] - h[[j, i]].conj()).norm());
        }
    }
    if asym > HERMITICITY_TOL * scale {
        return Err(CoreError::NotHermitian {
            asymmetry: asym,
            tolerance: HERMITICITY_TOL * scale,
        });
    }
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::EigenSolve(e.to_string()))?;
    let mut values: Vec<f64> = vals.iter().take(k).copied().collect();
    let mut vectors: Vec<Array1<Complex64>> = (0..k).map(|q| vecs.column(q).to_owned()).collect();
    for v in vectors.iter_mut() {
        fix_phase(v);
    }
    order_pairs(&mut values, &mut vectors, 1e-12 * scale);
    Ok((values, vectors))
}

/// Full eigendecomposition of a real symmetric matrix (ascending), used where
/// all eigenvectors are needed, e.g. exact time propagation.
pub fn eigh_real_full(h: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    h.eigh(UPLO::Lower)
        .map_err(|e| CoreError::EigenSolve(e.to_string()))
}
