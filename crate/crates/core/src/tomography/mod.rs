//! Charge-basis density-matrix reconstruction.
//!
//! A transformed diagonal rho'_nn measured after an adiabatic E_J sweep is a
//! linear functional of the untransformed density matrix,
//! rho'_nn = sum_jk M^n_kj rho_jk. Collecting such equations over many sweep
//! end-points E_J^i overdetermines rho, which is then recovered by
//! constrained least squares and clipped onto the physical (PSD, trace-1)
//! set.

pub mod maps;
pub mod solve;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::chargemodel::{ChargeBasis, ChargeWavefunction};
use crate::error::{CoreError, Result};

pub use maps::{
    adiabatic_transform, completeness_defect, measurement_map_analytic, measurement_map_numeric,
    AdiabaticTransform, MeasurementMap,
};
pub use solve::{
    build_numeric_maps, plan_configurations, simulate_measurements, solve_reconstruction,
    validate_model, ConfigPlan, MeasuredConfig, PlannedConfig, ReconstructionProblem,
    ReconstructionResult, SolverMode, ValidationRow,
};

/// Hermitian, trace-1 matrix over charge states -N..N.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: ChargeBasis,
    data: Array2<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace to 1e-12; positivity is checked
    /// separately (see [`DensityMatrix::min_eigenvalue`]) since raw
    /// least-squares output only becomes PSD after projection.
    pub fn new(basis: ChargeBasis, data: Array2<Complex64>) -> Result<Self> {
        let dim = basis.dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(CoreError::ShapeMismatch(format!(
                "{}x{} matrix for a dimension-{} basis",
                data.nrows(),
                data.ncols(),
                dim
            )));
        }
        let mut asym = 0.0f64;
        for j in 0..dim {
            for k in j..dim {
                asym = asym.max((data[[j, k]] - data[[k, j]].conj()).norm());
            }
        }
        if asym > 1e-12 {
            return Err(CoreError::NotHermitian {
                asymmetry: asym,
                tolerance: 1e-12,
            });
        }
        let trace: Complex64 = (0..dim).map(|i| data[[i, i]]).sum();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(CoreError::InvalidParameter(format!(
                "trace deviates from 1 by {:.3e}",
                (trace - Complex64::new(1.0, 0.0)).norm()
            )));
        }
        Ok(Self { basis, data })
    }

    /// rho = |psi><psi|.
    pub fn from_pure(psi: &ChargeWavefunction) -> Self {
        let dim = psi.basis().dim();
        let c = psi.coefficients();
        let data = Array2::from_shape_fn((dim, dim), |(j, k)| c[j] * c[k].conj());
        Self {
            basis: psi.basis(),
            data,
        }
    }

    pub fn basis(&self) -> ChargeBasis {
        self.basis
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    /// rho_{jk} with charge labels.
    pub fn entry(&self, j: i32, k: i32) -> Complex64 {
        self.data[[self.basis.index_of(j), self.basis.index_of(k)]]
    }

    pub fn diagonals(&self) -> Array1<f64> {
        Array1::from_iter((0..self.basis.dim()).map(|i| self.data[[i, i]].re))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = self
            .data
            .eigh(UPLO::Lower)
            .map_err(|e| CoreError::EigenSolve(e.to_string()))?;
        Ok(vals[0])
    }

    /// Plain truncation (or zero-padded extension) onto another window.
    /// The result is generally not trace-1; it is the raw comparison target
    /// for reconstructions on a finite window.
    pub fn truncated_raw(&self, basis: &ChargeBasis) -> Array2<Complex64> {
        let dim = basis.dim();
        Array2::from_shape_fn((dim, dim), |(j, k)| {
            let nj = basis.charge_at(j);
            let nk = basis.charge_at(k);
            if self.basis.contains(nj) && self.basis.contains(nk) {
                self.entry(nj, nk)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Clip the negative eigenvalues of a Hermitian matrix and renormalize the
/// trace to one.
pub fn project_physical(raw: &Array2<Complex64>, basis: &ChargeBasis) -> Result<DensityMatrix> {
    let dim = raw.nrows();
    if raw.ncols() != dim || dim != basis.dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "{}x{} matrix for a dimension-{} basis",
            raw.nrows(),
            raw.ncols(),
            basis.dim()
        )));
    }
    let scale = raw.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
    let mut asym = 0.0f64;
    for j in 0..dim {
        for k in j..dim {
            asym = asym.max((raw[[j, k]] - raw[[k, j]].conj()).norm());
        }
    }
    if asym > 1e-12 * scale {
        return Err(CoreError::NotHermitian {
            asymmetry: asym,
            tolerance: 1e-12 * scale,
        });
    }
    // symmetrize away roundoff before decomposing
    let herm = Array2::from_shape_fn((dim, dim), |(j, k)| {
        (raw[[j, k]] + raw[[k, j]].conj()) * 0.5
    });
    let (vals, vecs) = herm
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::EigenSolve(e.to_string()))?;
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(CoreError::NoPositiveWeight);
    }
    let mut data = Array2::<Complex64>::zeros((dim, dim));
    for (q, &w) in clipped.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let weight = w / total;
        for j in 0..dim {
            let vj = vecs[[j, q]];
            for k in 0..dim {
                data[[j, k]] += weight * vj * vecs[[k, q]].conj();
            }
        }
    }
    // exact unit trace and exact Hermiticity by construction; clean the
    // diagonal's imaginary roundoff
    for j in 0..dim {
        data[[j, j]] = Complex64::new(data[[j, j]].re, 0.0);
    }
    DensityMatrix::new(*basis, data)
}

/// The squared-Frobenius "Hilbert-Schmidt distance" sum_ij |a_ij - b_ij|^2.
pub fn hilbert_schmidt_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum())
}

/// Signed mean of the diagonal differences, sum_n (a_nn - b_nn) / dim.
/// Telescopes to zero for any pair of equal-trace matrices.
pub fn diagonal_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let dim = a.nrows();
    Ok((0..dim)
        .map(|i| a[[i, i]].re - b[[i, i]].re)
        .sum::<f64>()
        / dim as f64)
}
