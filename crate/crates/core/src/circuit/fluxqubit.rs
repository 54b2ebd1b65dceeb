//! The probe flux qubit: three charge degrees of freedom (n1, n2, n3) with
//! the charging form from the inverted capacitance matrix and four Josephson
//! terms. The external flux f_p enters the right alpha-junction as phase
//! factors e^{+-2 pi i f_p} on its charge-shift operator; gauge invariance
//! (moving f_p to the left junction) is checked by test.

use ndarray::Array1;
use num_complex::Complex64;

use crate::circuit::{derived_capacitances, CircuitSpec};
use crate::constants;
use crate::error::{CoreError, Result};
use crate::linalg::{eigh_complex_lowest, lanczos_lowest, LanczosConfig, SparseHermitian};

/// Solver options for the three-node diagonalization.
#[derive(Debug, Clone)]
pub struct FluxQubitOptions {
    /// Per-node charge cutoff; dimension is (2 Np + 1)^3.
    pub np: u32,
    /// Eigenpairs to compute (>= 2 for the qubit subspace).
    pub k: usize,
    /// Densities at or below this use the dense solver; larger ones the
    /// sparse Lanczos path.
    pub dense_dim_threshold: usize,
    /// Hard cap on the Hilbert dimension.
    pub dim_cap: usize,
    /// Re-solve at Np + 2 and flag Delta_p shifts above 0.5%.
    pub convergence_check: bool,
    /// Assign f_p to the left alpha-junction instead of the right (gauge
    /// check only; spectra are identical).
    pub flux_on_left: bool,
    pub lanczos: LanczosConfig,
}

impl Default for FluxQubitOptions {
    fn default() -> Self {
        Self {
            np: 7,
            k: 4,
            dense_dim_threshold: 1000,
            dim_cap: 40_000,
            convergence_check: false,
            flux_on_left: false,
            lanczos: LanczosConfig::default(),
        }
    }
}

/// Lowest eigenpairs of the probe circuit and the qubit gap.
#[derive(Debug, Clone)]
pub struct FluxQubitSubspace {
    pub np: u32,
    /// E/h in GHz, ascending.
    pub eigenvalues: Vec<f64>,
    /// Amplitude tensors over (n1, n2, n3), flattened row-major.
    pub states: Vec<Array1<Complex64>>,
    /// Qubit gap Delta_p = eps_1 - eps_0, GHz.
    pub delta_p: f64,
    /// Relative Delta_p shift observed at Np + 2, when the check ran and the
    /// shift exceeded 0.5%.
    pub convergence_warning: Option<f64>,
}

pub(crate) struct NodeBasis {
    np: i32,
    side: usize,
}

impl NodeBasis {
    pub(crate) fn new(np: u32) -> Self {
        Self {
            np: np as i32,
            side: 2 * np as usize + 1,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.side * self.side * self.side
    }

    pub(crate) fn index(&self, n1: i32, n2: i32, n3: i32) -> usize {
        let a = (n1 + self.np) as usize;
        let b = (n2 + self.np) as usize;
        let c = (n3 + self.np) as usize;
        (a * self.side + b) * self.side + c
    }

    pub(crate) fn charges(&self, index: usize) -> (i32, i32, i32) {
        let c = (index % self.side) as i32 - self.np;
        let rest = index / self.side;
        let b = (rest % self.side) as i32 - self.np;
        let a = (rest / self.side) as i32 - self.np;
        (a, b, c)
    }

    pub(crate) fn np(&self) -> i32 {
        self.np
    }
}

/// Probe Hamiltonian on the (n1, n2, n3) charge lattice, GHz.
pub(crate) fn build_probe_hamiltonian(
    spec: &CircuitSpec,
    np: u32,
    flux_on_left: bool,
) -> Result<SparseHermitian> {
    let derived = derived_capacitances(spec)?;
    let alpha = spec.alpha();
    // (2e)^2 * coef[1/fF] -> GHz: coef_* carry 1/fF, 4 e^2/(h fF) = 8 * EC scale
    let e2 = 8.0 * constants::EC_GHZ_PER_INV_FF;
    let ca = e2 * derived.coef_a(alpha);
    let cb = e2 * derived.coef_b(alpha);
    let cc = e2 * derived.coef_c(alpha);
    let cd = e2 * derived.coef_d(alpha);

    let basis = NodeBasis::new(np);
    let dim = basis.dim();
    let offset = spec.ejp * (2.0 + spec.alpha_l + spec.alpha_r);
    let re = |x: f64| Complex64::new(x, 0.0);
    let fp_phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * spec.f_p);

    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(dim * 9);
    for row in 0..dim {
        let (n1, n2, n3) = basis.charges(row);
        let (f1, f2) = (n1 as f64, n2 as f64);
        let f3 = n3 as f64 - spec.ng_p;
        let charging =
            ca * (f1 * f1 + f2 * f2) + cb * f1 * f2 + cc * (f1 + f2) * f3 + cd * f3 * f3;
        triplets.push((row, row, re(charging + offset)));

        // -EJp/2 cos(2 pi phi_1), cos(2 pi phi_2): single-node shifts
        let half = -spec.ejp / 2.0;
        if n1 < basis.np() {
            triplets.push((row, basis.index(n1 + 1, n2, n3), re(half)));
        }
        if n1 > -basis.np() {
            triplets.push((row, basis.index(n1 - 1, n2, n3), re(half)));
        }
        if n2 < basis.np() {
            triplets.push((row, basis.index(n1, n2 + 1, n3), re(half)));
        }
        if n2 > -basis.np() {
            triplets.push((row, basis.index(n1, n2 - 1, n3), re(half)));
        }

        // left alpha junction, cos(2 pi (phi_3 - phi_1 [+ f_p])):
        // shifts (n1 + 1, n3 - 1) and (n1 - 1, n3 + 1)
        let left = -spec.alpha_l * spec.ejp / 2.0;
        let left_phase = if flux_on_left { fp_phase } else { re(1.0) };
        if n1 < basis.np() && n3 > -basis.np() {
            triplets.push((row, basis.index(n1 + 1, n2, n3 - 1), left * left_phase));
        }
        if n1 > -basis.np() && n3 < basis.np() {
            triplets.push((
                row,
                basis.index(n1 - 1, n2, n3 + 1),
                left * left_phase.conj(),
            ));
        }

        // right alpha junction, cos(2 pi (phi_2 - phi_3 [+ f_p])):
        // shifts (n2 + 1, n3 - 1) and (n2 - 1, n3 + 1)
        let right = -spec.alpha_r * spec.ejp / 2.0;
        let right_phase = if flux_on_left { re(1.0) } else { fp_phase };
        if n2 < basis.np() && n3 > -basis.np() {
            triplets.push((row, basis.index(n1, n2 + 1, n3 - 1), right * right_phase));
        }
        if n2 > -basis.np() && n3 < basis.np() {
            triplets.push((
                row,
                basis.index(n1, n2 - 1, n3 + 1),
                right * right_phase.conj(),
            ));
        }
    }
    Ok(SparseHermitian::from_triplets(dim, &triplets))
}

fn solve_lowest(
    spec: &CircuitSpec,
    opts: &FluxQubitOptions,
    np: u32,
    k: usize,
) -> Result<(Vec<f64>, Vec<Array1<Complex64>>)> {
    let basis = NodeBasis::new(np);
    if basis.dim() > opts.dim_cap {
        return Err(CoreError::DimensionCap {
            dim: basis.dim(),
            cap: opts.dim_cap,
        });
    }
    let h = build_probe_hamiltonian(spec, np, opts.flux_on_left)?;
    if basis.dim() <= opts.dense_dim_threshold {
        eigh_complex_lowest(&h.to_dense(), k)
    } else {
        let cfg = LanczosConfig {
            k,
            ..opts.lanczos.clone()
        };
        lanczos_lowest(&h, &cfg)
    }
}

/// Diagonalize the probe circuit: lowest `opts.k` eigenpairs and the qubit
/// gap Delta_p.
pub fn flux_qubit_eigensystem(
    spec: &CircuitSpec,
    opts: &FluxQubitOptions,
) -> Result<FluxQubitSubspace> {
    spec.validate()?;
    if opts.k < 2 {
        return Err(CoreError::InvalidParameter(
            "need at least 2 eigenpairs for the qubit subspace".into(),
        ));
    }
    let (eigenvalues, states) = solve_lowest(spec, opts, opts.np, opts.k)?;
    let delta_p = eigenvalues[1] - eigenvalues[0];
    let mut convergence_warning = None;
    if opts.convergence_check {
        let (check_vals, _) = solve_lowest(spec, opts, opts.np + 2, 2)?;
        let delta_check = check_vals[1] - check_vals[0];
        let shift = (delta_check - delta_p).abs() / delta_check.abs().max(1e-12);
        if shift > 0.005 {
            convergence_warning = Some(shift);
        }
    }
    Ok(FluxQubitSubspace {
        np: opts.np,
        eigenvalues,
        states,
        delta_p,
        convergence_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_opts(np: u32) -> FluxQubitOptions {
        FluxQubitOptions {
            np,
            k: 2,
            ..Default::default()
        }
    }

    fn gap(spec: &CircuitSpec, np: u32) -> f64 {
        flux_qubit_eigensystem(spec, &small_opts(np)).unwrap().delta_p
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let spec = CircuitSpec::reference();
        let h = build_probe_hamiltonian(&spec, 3, false).unwrap();
        assert!(h.asymmetry() < 1e-12);
        // 9 stored entries per interior row
        assert!(h.nnz() <= NodeBasis::new(3).dim() * 9);
    }

    #[test]
    fn flux_gauge_invariance() {
        // moving f_p from the right to the left alpha junction must not move
        // the spectrum
        let mut spec = CircuitSpec::reference();
        spec.f_p = 0.37;
        spec.ng_p = 0.13;
        let mut right = small_opts(3);
        right.k = 4;
        let mut left = right.clone();
        left.flux_on_left = true;
        let a = flux_qubit_eigensystem(&spec, &right).unwrap();
        let b = flux_qubit_eigensystem(&spec, &left).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter()) {
            assert!((x - y).abs() < 1e-10 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn gap_periodic_and_even_in_offset_charge() {
        let mut spec = CircuitSpec::reference();
        spec.ng_p = 0.23;
        let d0 = gap(&spec, 3);
        spec.ng_p = -0.23;
        let d_neg = gap(&spec, 3);
        spec.ng_p = 1.23;
        let d_shift = gap(&spec, 4);
        assert_abs_diff_eq!(d0, d_neg, epsilon = 1e-8 * d0.abs().max(1.0));
        // period-1 shift needs margin in the truncation to stay converged
        assert!((d0 - d_shift).abs() / d0.abs().max(1e-12) < 1e-3, "{d0} vs {d_shift}");
    }

    #[test]
    fn gap_extremal_at_integer_and_half_offset() {
        let spec = CircuitSpec::reference();
        let at = |ng: f64| {
            let mut s = spec;
            s.ng_p = ng;
            gap(&s, 3)
        };
        let center = at(0.0);
        let quarter = at(0.25);
        let near_half = at(0.45);
        assert!(center > quarter, "{center} vs {quarter}");
        assert!(quarter > near_half, "{quarter} vs {near_half}");
        // Aharonov-Casher suppression toward ng = 1/2
        assert!(near_half < 0.2 * center, "{near_half} vs {center}");
    }

    #[test]
    fn dense_and_lanczos_paths_agree() {
        let spec = CircuitSpec::reference();
        let mut dense = small_opts(3);
        dense.dense_dim_threshold = usize::MAX;
        dense.k = 3;
        let mut sparse = small_opts(3);
        sparse.dense_dim_threshold = 0;
        sparse.k = 3;
        let a = flux_qubit_eigensystem(&spec, &dense).unwrap();
        let b = flux_qubit_eigensystem(&spec, &sparse).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter()) {
            assert!((x - y).abs() < 1e-8 * x.abs().max(1.0), "{x} vs {y}");
        }
        for (va, vb) in a.states.iter().zip(b.states.iter()) {
            let overlap: Complex64 = va.iter().zip(vb.iter()).map(|(p, q)| p.conj() * q).sum();
            assert!(overlap.norm() > 1.0 - 1e-7, "overlap {}", overlap.norm());
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let spec = CircuitSpec::reference();
        let mut opts = small_opts(20);
        opts.dim_cap = 10_000;
        assert!(matches!(
            flux_qubit_eigensystem(&spec, &opts),
            Err(CoreError::DimensionCap { .. })
        ));
    }
}
