//! Adiabatic transforms and the measurement-map tensor.
//!
//! An adiabatic E_J sweep from E_J^0 to E_J^i maps eigenstates onto
//! eigenstates, T = sum_q e^{-i theta_q} |psi_q[E_J^i]><psi_q[E_J^0]|, with
//! theta_q the accumulated dynamical phases (zero for ground-state work).
//! The measured diagonals after the sweep couple to the original density
//! matrix through M^n_kj = <n|T|j><k|T^dag|n>.

use ndarray::{Array2, Array3, ArrayView2};
use num_complex::Complex64;

use crate::chargemodel::{self, ChargeBasis, ChargeWavefunction, TargetModel};
use crate::error::{CoreError, Result};

/// Unitary connecting the eigenbases at two Josephson energies, on the
/// internal truncation.
#[derive(Debug, Clone)]
pub struct AdiabaticTransform {
    pub ej_start: f64,
    pub ej_end: f64,
    pub phases: Vec<f64>,
    basis: ChargeBasis,
    matrix: Array2<Complex64>,
}

impl AdiabaticTransform {
    pub fn basis(&self) -> ChargeBasis {
        self.basis
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// <n|T|j> with charge labels.
    pub fn element(&self, n: i32, j: i32) -> Complex64 {
        self.matrix[[self.basis.index_of(n), self.basis.index_of(j)]]
    }

    /// max |(T^dag T - I)_{kj}|.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.basis.dim();
        let mut worst = 0.0f64;
        for k in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..dim {
                    acc += self.matrix[[n, k]].conj() * self.matrix[[n, j]];
                }
                let target = if k == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Apply T to a state on the same basis.
    pub fn apply(&self, psi: &ChargeWavefunction) -> Result<ChargeWavefunction> {
        if psi.basis() != self.basis {
            return Err(CoreError::ShapeMismatch(
                "state basis does not match transform basis".into(),
            ));
        }
        let dim = self.basis.dim();
        let mut out = ndarray::Array1::<Complex64>::zeros(dim);
        for m in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                acc += self.matrix[[m, j]] * psi.coefficients()[j];
            }
            out[m] = acc;
        }
        ChargeWavefunction::new(self.basis, out)
    }
}

/// Build the adiabatic transform for `model` swept from its E_J to `ej_end`.
///
/// Both eigensystems are computed on `basis` (use the internal truncation).
/// `phases` lists theta_q per level and is zero-padded, so ground-state
/// protocols pass `&[]`. Level-ordering swaps between the two configurations
/// are detected through the overlap matrix and rejected.
pub fn adiabatic_transform(
    model: &TargetModel,
    ej_end: f64,
    phases: &[f64],
    basis: &ChargeBasis,
) -> Result<AdiabaticTransform> {
    let dim = basis.dim();
    let sys0 = chargemodel::solve_model(model, basis, dim)?;
    let model_i = model.at_ej(ej_end)?;
    let sys_i = chargemodel::solve_model(&model_i, basis, dim)?;

    // overlap pattern <psi_p^i | psi_q^0>: adiabatic continuation pairs level
    // q with level q; a dominant off-diagonal overlap flags a crossing
    for q in 0..dim {
        let mut best = (0usize, 0.0f64);
        for p in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..dim {
                acc += sys_i.states[p].coefficients()[m].conj() * sys0.states[q].coefficients()[m];
            }
            let w = acc.norm_sqr();
            if w > best.1 {
                best = (p, w);
            }
        }
        if best.0 != q && best.1 > 0.6 {
            return Err(CoreError::LevelCrossing {
                level_from: q,
                level_to: best.0,
            });
        }
    }

    let mut matrix = Array2::<Complex64>::zeros((dim, dim));
    for q in 0..dim {
        let theta = phases.get(q).copied().unwrap_or(0.0);
        let phase = Complex64::from_polar(1.0, -theta);
        let ket = sys_i.states[q].coefficients();
        let bra = sys0.states[q].coefficients();
        for m in 0..dim {
            let amp = phase * ket[m];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                matrix[[m, j]] += amp * bra[j].conj();
            }
        }
    }

    Ok(AdiabaticTransform {
        ej_start: model.ej,
        ej_end,
        phases: phases.to_vec(),
        basis: *basis,
        matrix,
    })
}

/// The tensor M^n_kj for measured |n| <= n_meas and density-matrix indices
/// |j|, |k| <= n_rep.
#[derive(Debug, Clone)]
pub struct MeasurementMap {
    pub ej_config: f64,
    meas_basis: ChargeBasis,
    rep_basis: ChargeBasis,
    /// tensor[(n, k, j)] indexed over (measured, rep, rep)
    tensor: Array3<Complex64>,
}

impl MeasurementMap {
    pub fn meas_basis(&self) -> ChargeBasis {
        self.meas_basis
    }

    pub fn rep_basis(&self) -> ChargeBasis {
        self.rep_basis
    }

    pub fn entry(&self, n: i32, k: i32, j: i32) -> Complex64 {
        self.tensor[[
            self.meas_basis.index_of(n),
            self.rep_basis.index_of(k),
            self.rep_basis.index_of(j),
        ]]
    }

    pub fn slice(&self, n: i32) -> ArrayView2<Complex64> {
        self.tensor
            .index_axis(ndarray::Axis(0), self.meas_basis.index_of(n))
    }

    /// max |M^n_kj - conj(M^n_jk)| over the tensor.
    pub fn conjugation_defect(&self) -> f64 {
        let (nn, dd, _) = self.tensor.dim();
        let mut worst = 0.0f64;
        for n in 0..nn {
            for k in 0..dd {
                for j in 0..dd {
                    worst = worst
                        .max((self.tensor[[n, k, j]] - self.tensor[[n, j, k]].conj()).norm());
                }
            }
        }
        worst
    }

    /// Predicted diagonal rho'_nn = sum_jk M^n_kj rho_jk for a density matrix
    /// on the representation window.
    pub fn predict(&self, rho: &Array2<Complex64>, n: i32) -> Result<f64> {
        let dim = self.rep_basis.dim();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(CoreError::ShapeMismatch(format!(
                "{}x{} density matrix for representation dimension {}",
                rho.nrows(),
                rho.ncols(),
                dim
            )));
        }
        let slice = self.slice(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..dim {
            for j in 0..dim {
                acc += slice[[k, j]] * rho[[j, k]];
            }
        }
        Ok(acc.re)
    }
}

/// M^n_kj = <n|T|j> <k|T^dag|n> from a numeric adiabatic transform.
pub fn measurement_map_numeric(
    transform: &AdiabaticTransform,
    n_rep: u32,
    n_meas: u32,
) -> Result<MeasurementMap> {
    let internal = transform.basis();
    if n_meas > internal.n_max() || n_rep > internal.n_max() {
        return Err(CoreError::InvalidParameter(format!(
            "cutoffs ({n_rep}, {n_meas}) exceed the internal truncation {}",
            internal.n_max()
        )));
    }
    let meas_basis = ChargeBasis::new(n_meas);
    let rep_basis = ChargeBasis::new(n_rep);
    let mut tensor = Array3::zeros((meas_basis.dim(), rep_basis.dim(), rep_basis.dim()));
    for (ni, n) in meas_basis.charges().enumerate() {
        for (ki, k) in rep_basis.charges().enumerate() {
            for (ji, j) in rep_basis.charges().enumerate() {
                tensor[[ni, ki, ji]] = transform.element(n, j) * transform.element(n, k).conj();
            }
        }
    }
    Ok(MeasurementMap {
        ej_config: transform.ej_end,
        meas_basis,
        rep_basis,
        tensor,
    })
}

/// max |sum_n M^n - I| with the n-sum over the full internal truncation;
/// vanishes by unitarity of T.
pub fn completeness_defect(transform: &AdiabaticTransform, n_rep: u32) -> Result<f64> {
    let full = measurement_map_numeric(transform, n_rep, transform.basis().n_max())?;
    let rep = ChargeBasis::new(n_rep);
    let mut worst = 0.0f64;
    for k in rep.charges() {
        for j in rep.charges() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in full.meas_basis().charges() {
                acc += full.entry(n, k, j);
            }
            let target = if k == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// Harmonic-regime closed form of the map: the T-matrix elements are built
/// from the renormalized Hermite-Gaussian levels with the equally-spaced
/// phase ladder theta_q = q * theta_0, truncating the level sums when their
/// contribution falls below 1e-14.
///
/// Returns the map and a regime flag: `true` when either E_J/E_C < 5, where
/// the harmonic approximation degrades (recorded, not a hard error).
pub fn measurement_map_analytic(
    model: &TargetModel,
    ej_end: f64,
    theta_0: f64,
    n_rep: u32,
    n_meas: u32,
) -> Result<(MeasurementMap, bool)> {
    let internal = ChargeBasis::internal_for(model);
    if n_meas > internal.n_max() || n_rep > internal.n_max() {
        return Err(CoreError::InvalidParameter(format!(
            "cutoffs ({n_rep}, {n_meas}) exceed the internal truncation {}",
            internal.n_max()
        )));
    }
    let model_i = model.at_ej(ej_end)?;
    let regime_warning = model.ratio() < 5.0 || model_i.ratio() < 5.0;

    let meas_basis = ChargeBasis::new(n_meas);
    let rep_basis = ChargeBasis::new(n_rep);
    // b[n, j] = <n|T|j> = sum_p e^{-ip theta_0} c_n^p[EJ^i] conj(c_j^p[EJ^0])
    let mut b = Array2::<Complex64>::zeros((meas_basis.dim(), rep_basis.dim()));
    let max_levels = 40usize;
    let mut quiet_streak = 0usize;
    for p in 0..max_levels {
        let level_i = chargemodel::analytic_state(p, &model_i, &internal)?;
        let level_0 = chargemodel::analytic_state(p, model, &internal)?;
        let phase = Complex64::from_polar(1.0, -(p as f64) * theta_0);
        let mut largest = 0.0f64;
        for (ni, n) in meas_basis.charges().enumerate() {
            let cn = level_i.coefficient(n);
            for (ji, j) in rep_basis.charges().enumerate() {
                let term = phase * cn * level_0.coefficient(j).conj();
                largest = largest.max(term.norm());
                b[[ni, ji]] += term;
            }
        }
        if largest < 1e-14 {
            quiet_streak += 1;
            if quiet_streak >= 3 {
                break;
            }
        } else {
            quiet_streak = 0;
        }
    }

    let mut tensor = Array3::zeros((meas_basis.dim(), rep_basis.dim(), rep_basis.dim()));
    for ni in 0..meas_basis.dim() {
        for ki in 0..rep_basis.dim() {
            for ji in 0..rep_basis.dim() {
                tensor[[ni, ki, ji]] = b[[ni, ji]] * b[[ni, ki]].conj();
            }
        }
    }
    Ok((
        MeasurementMap {
            ej_config: ej_end,
            meas_basis,
            rep_basis,
            tensor,
        },
        regime_warning,
    ))
}
