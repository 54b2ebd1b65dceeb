//! Single-island junction models in the truncated charge basis.
//!
//! The target circuit is a Cooper-pair box H = 4 E_C (n - n_g)^2
//! - E_J cos(phi) - E_J2 cos(2 phi), expressed on relative-charge eigenstates
//! |n>, n = -N..N. cos(phi) shifts the island charge by one Cooper pair and
//! cos(2 phi) by two, so the Hamiltonian matrix is banded: the charging term
//! on the diagonal, -E_J/2 on the first off-diagonals and -E_J2/2 on the
//! second.

pub mod analytic;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::linalg;

pub use analytic::{analytic_coefficient, analytic_state, hermite_prob};

/// Cooper-pair-box parameters. Energies share one unit (E_C = 1 internally,
/// or GHz as E/h when fed from the CLI); `ng` is in Cooper pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetModel {
    pub ec: f64,
    pub ej: f64,
    pub ej2: f64,
    pub ng: f64,
}

impl TargetModel {
    pub fn new(ec: f64, ej: f64, ng: f64) -> Result<Self> {
        Self::with_ej2(ec, ej, 0.0, ng)
    }

    pub fn with_ej2(ec: f64, ej: f64, ej2: f64, ng: f64) -> Result<Self> {
        if !(ec > 0.0) {
            return Err(CoreError::InvalidParameter(format!("EC must be > 0, got {ec}")));
        }
        if !(ej >= 0.0) {
            return Err(CoreError::InvalidParameter(format!("EJ must be >= 0, got {ej}")));
        }
        if !(ej2 >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "EJ2 must be >= 0, got {ej2}"
            )));
        }
        if !ng.is_finite() {
            return Err(CoreError::InvalidParameter(format!("ng must be finite, got {ng}")));
        }
        Ok(Self { ec, ej, ej2, ng })
    }

    /// E_J / E_C.
    pub fn ratio(&self) -> f64 {
        self.ej / self.ec
    }

    /// Width parameter of the harmonic-regime ground state, (E_J/8E_C)^(1/4).
    pub fn beta(&self) -> f64 {
        (self.ej / (8.0 * self.ec)).powf(0.25)
    }

    /// Copy with a different Josephson energy, e.g. for adiabatic sweeps.
    pub fn at_ej(&self, ej: f64) -> Result<Self> {
        Self::with_ej2(self.ec, ej, self.ej2, self.ng)
    }
}

/// Symmetric truncation of the charge ladder: states n in {-N..N}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChargeBasis {
    n_max: u32,
}

impl ChargeBasis {
    pub fn new(n_max: u32) -> Self {
        Self { n_max }
    }

    /// Representation truncation for a ground state: ceil(3 beta) + 2.
    /// The +2 is margin over the 3-beta support estimate.
    pub fn default_for(model: &TargetModel) -> Self {
        let n = (3.0 * model.beta()).ceil() as u32 + 2;
        Self { n_max: n.max(3) }
    }

    /// Internal computation truncation, 2N + 5 over the representation N,
    /// so representation choices do not contaminate computed spectra.
    pub fn internal_for(model: &TargetModel) -> Self {
        let n = Self::default_for(model).n_max;
        Self { n_max: 2 * n + 5 }
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max as usize + 1
    }

    pub fn index_of(&self, n: i32) -> usize {
        debug_assert!(n.unsigned_abs() <= self.n_max);
        (n + self.n_max as i32) as usize
    }

    pub fn charge_at(&self, index: usize) -> i32 {
        debug_assert!(index < self.dim());
        index as i32 - self.n_max as i32
    }

    pub fn charges(&self) -> impl Iterator<Item = i32> {
        let n = self.n_max as i32;
        -n..=n
    }

    pub fn contains(&self, n: i32) -> bool {
        n.unsigned_abs() <= self.n_max
    }
}

/// A normalized state over a charge basis.
#[derive(Debug, Clone)]
pub struct ChargeWavefunction {
    basis: ChargeBasis,
    coefficients: Array1<Complex64>,
}

impl ChargeWavefunction {
    pub fn new(basis: ChargeBasis, coefficients: Array1<Complex64>) -> Result<Self> {
        if coefficients.len() != basis.dim() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} coefficients for a dimension-{} basis",
                coefficients.len(),
                basis.dim()
            )));
        }
        let norm_sq: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidParameter(format!(
                "wavefunction norm^2 deviates from 1 by {:.3e}",
                (norm_sq - 1.0).abs()
            )));
        }
        Ok(Self { basis, coefficients })
    }

    /// Basis state |n>.
    pub fn charge_state(basis: ChargeBasis, n: i32) -> Self {
        let mut c = Array1::zeros(basis.dim());
        c[basis.index_of(n)] = Complex64::new(1.0, 0.0);
        Self {
            basis,
            coefficients: c,
        }
    }

    pub fn basis(&self) -> ChargeBasis {
        self.basis
    }

    pub fn coefficients(&self) -> &Array1<Complex64> {
        &self.coefficients
    }

    pub fn coefficient(&self, n: i32) -> Complex64 {
        if self.basis.contains(n) {
            self.coefficients[self.basis.index_of(n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Re-express on another symmetric basis, zero-padding or truncating.
    /// Truncation must not clip more than `loss_tol` of the norm.
    pub fn rebased(&self, basis: ChargeBasis, loss_tol: f64) -> Result<Self> {
        let mut c = Array1::zeros(basis.dim());
        for n in self.basis.charges() {
            if basis.contains(n) {
                c[basis.index_of(n)] = self.coefficient(n);
            }
        }
        let kept: f64 = c.iter().map(|x: &Complex64| x.norm_sqr()).sum();
        if 1.0 - kept > loss_tol {
            return Err(CoreError::InvalidParameter(format!(
                "rebasing clips {:.3e} of the norm (tolerance {loss_tol:.3e})",
                1.0 - kept
            )));
        }
        let scale = kept.sqrt();
        c.mapv_inplace(|x| x / scale);
        Ok(Self {
            basis,
            coefficients: c,
        })
    }
}

/// Eigenvalues and eigenvectors of a charge-basis Hamiltonian, ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub states: Vec<ChargeWavefunction>,
}

impl EigenSystem {
    pub fn ground(&self) -> &ChargeWavefunction {
        &self.states[0]
    }
}

/// Charge-basis matrix of H = 4 E_C (n - n_g)^2 - E_J cos(phi) - E_J2 cos(2 phi).
///
/// Exactly symmetric by construction: the diagonal carries the charging
/// parabola, the first off-diagonals -E_J/2 and the second -E_J2/2.
pub fn build_target_hamiltonian(model: &TargetModel, basis: &ChargeBasis) -> Array2<f64> {
    assert!(basis.n_max() >= 1, "charge basis needs N >= 1");
    let dim = basis.dim();
    let mut h = Array2::zeros((dim, dim));
    for (i, n) in basis.charges().enumerate() {
        let x = n as f64 - model.ng;
        h[[i, i]] = 4.0 * model.ec * x * x;
        if i + 1 < dim {
            h[[i, i + 1]] = -model.ej / 2.0;
            h[[i + 1, i]] = -model.ej / 2.0;
        }
        if i + 2 < dim {
            h[[i, i + 2]] = -model.ej2 / 2.0;
            h[[i + 2, i]] = -model.ej2 / 2.0;
        }
    }
    h
}

/// Lowest `k` eigenpairs of a Hermitian charge-basis matrix.
///
/// Rejects non-symmetric input; eigenvectors are orthonormal, phase-fixed
/// (largest-magnitude coefficient real positive) and degenerate levels are
/// ordered by the anchor-coefficient index.
pub fn eigensystem(h: &Array2<f64>, k: usize, basis: &ChargeBasis) -> Result<EigenSystem> {
    if h.nrows() != basis.dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "Hamiltonian dimension {} does not match basis dimension {}",
            h.nrows(),
            basis.dim()
        )));
    }
    let (values, vectors) = linalg::eigh_real_lowest(h, k)?;
    let states = vectors
        .into_iter()
        .map(|v| ChargeWavefunction::new(*basis, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenSystem { values, states })
}

/// Build + diagonalize in one step on the given basis.
pub fn solve_model(model: &TargetModel, basis: &ChargeBasis, k: usize) -> Result<EigenSystem> {
    let h = build_target_hamiltonian(model, basis);
    eigensystem(&h, k, basis)
}

/// Ground state on the model's internal truncation.
pub fn ground_state(model: &TargetModel) -> Result<ChargeWavefunction> {
    let basis = ChargeBasis::internal_for(model);
    Ok(solve_model(model, &basis, 1)?.states.remove(0))
}

/// p_n = |c_n|^2, aligned with the wavefunction's basis.
pub fn charge_probabilities(psi: &ChargeWavefunction) -> Array1<f64> {
    psi.coefficients().mapv(|c| c.norm_sqr())
}

/// Transmon plasma frequency sqrt(8 E_C E_J) - E_C/2.
///
/// The expression crosses zero at E_J/E_C = 1/32; callers must treat the
/// harmonic regime as invalid there.
pub fn plasma_frequency(model: &TargetModel) -> Result<f64> {
    if model.ej <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "plasma frequency needs EJ > 0, got {}",
            model.ej
        )));
    }
    Ok((8.0 * model.ec * model.ej).sqrt() - model.ec / 2.0)
}
