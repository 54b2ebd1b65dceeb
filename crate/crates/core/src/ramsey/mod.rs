//! Quench-and-Ramsey readout of the target's charge distribution.
//!
//! After the state is prepared, the Josephson energy is quenched (ideally to
//! zero), the longitudinal coupling g n sigma_z is switched on, and the probe
//! precesses between two pi/2 pulses. The recorded <sigma_x(t)> oscillates at
//! omega_n = Delta_p + 2 g n (hbar = 1 here), one tone per occupied charge
//! state, with amplitude p_n = |c_n|^2.
//!
//! The post-quench Hamiltonian is time independent, so propagation uses its
//! eigendecomposition and is exact at every grid point; no integrator
//! tolerance enters the protocol chain.

pub mod spectral;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::chargemodel::{build_target_hamiltonian, ChargeBasis, ChargeWavefunction, TargetModel};
use crate::error::{CoreError, Result};
use crate::linalg;

pub use spectral::{
    extract_probabilities, periodogram, residual_ej_scan, Periodogram, ScanTable, SpectralPeaks,
};

/// Probe qubit parameters: gap Delta_p and longitudinal coupling g, in the
/// same energy unit as the target model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    pub delta_p: f64,
    pub g: f64,
}

impl ProbeSpec {
    pub fn new(delta_p: f64, g: f64) -> Result<Self> {
        if !(delta_p > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "probe gap must be > 0, got {delta_p}"
            )));
        }
        if g == 0.0 || !g.is_finite() {
            return Err(CoreError::InvalidParameter(
                "coupling g must be nonzero for distinct readout tones".into(),
            ));
        }
        Ok(Self { delta_p, g })
    }

    /// Readout tone omega_n = Delta_p + 2 g n (hbar = 1).
    pub fn omega(&self, n: i32) -> f64 {
        self.delta_p + 2.0 * self.g * n as f64
    }

    fn max_abs_omega(&self, basis: &ChargeBasis) -> f64 {
        basis
            .charges()
            .map(|n| self.omega(n).abs())
            .fold(0.0, f64::max)
    }
}

/// Uniform time grid starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Array1<f64>,
}

impl TimeGrid {
    /// `samples` points t_i = i * duration / samples.
    pub fn uniform(duration: f64, samples: usize) -> Result<Self> {
        if !(duration > 0.0) || samples < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "time grid needs duration > 0 and >= 2 samples, got {duration}, {samples}"
            )));
        }
        let dt = duration / samples as f64;
        Ok(Self {
            times: Array1::from_iter((0..samples).map(|i| i as f64 * dt)),
        })
    }

    /// Protocol default: duration 20 h / (2g) and at least 2048 samples,
    /// growing as needed to keep the rate >= 4x the largest tone.
    pub fn protocol_default(probe: &ProbeSpec, basis: &ChargeBasis) -> Result<Self> {
        let duration = 20.0 * std::f64::consts::PI / probe.g.abs();
        let max_cycles_per_unit = probe.max_abs_omega(basis) / (2.0 * std::f64::consts::PI);
        let mut samples = 2048usize;
        let needed = (4.0 * max_cycles_per_unit * duration).ceil() as usize;
        while samples < needed {
            samples *= 2;
        }
        Self::uniform(duration, samples)
    }

    pub fn times(&self) -> &Array1<f64> {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] + self.dt()
    }
}

/// A simulated <sigma_x^(p)(t)> record.
#[derive(Debug, Clone)]
pub struct RamseyRecord {
    pub times: Array1<f64>,
    pub sigma_x: Array1<f64>,
    pub residual_ej: f64,
    pub probe: ProbeSpec,
}

/// Coupled target-probe Hamiltonian on the product basis |n> (x) |s>,
/// H = H_t (x) I + g n sigma_z + (Delta_p/2) sigma_z.
///
/// Layout: index = s * dim + n_index with s = 0 the sigma_z = +1 block, so
/// the matrix is visibly block-diagonal in the probe basis.
pub fn build_coupled_hamiltonian(
    model: &TargetModel,
    probe: &ProbeSpec,
    basis: &ChargeBasis,
) -> Array2<f64> {
    let dim = basis.dim();
    let ht = build_target_hamiltonian(model, basis);
    let mut h = Array2::zeros((2 * dim, 2 * dim));
    for (s, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        for i in 0..dim {
            for j in 0..dim {
                h[[s * dim + i, s * dim + j]] = ht[[i, j]];
            }
            let n = basis.charge_at(i) as f64;
            h[[s * dim + i, s * dim + i]] += sign * (probe.g * n + probe.delta_p / 2.0);
        }
    }
    h
}

/// Closed-form readout signal sum_n p_n cos(omega_n t) for an ideal quench.
pub fn analytic_sigma_x(probs: &[(i32, f64)], probe: &ProbeSpec, t: f64) -> f64 {
    probs
        .iter()
        .map(|&(n, p)| p * (probe.omega(n) * t).cos())
        .sum()
}

/// Simulate the protocol: evolve |psi(0)> = prepared (x) (|down> + |up>)/sqrt(2)
/// under the (time-independent) readout Hamiltonian and record <sigma_x(t)>.
///
/// `readout_model.ej` is the residual Josephson energy during t >= 0; zero is
/// the ideal protocol. Propagation is exact via eigendecomposition of the two
/// sigma_z blocks.
pub fn simulate_protocol(
    prepared: &ChargeWavefunction,
    readout_model: &TargetModel,
    probe: &ProbeSpec,
    grid: &TimeGrid,
) -> Result<RamseyRecord> {
    let basis = prepared.basis();
    let omega_max = probe.max_abs_omega(&basis);
    let max_dt = std::f64::consts::PI / omega_max;
    if grid.dt() > max_dt {
        return Err(CoreError::NyquistViolation {
            dt: grid.dt(),
            omega: omega_max,
            max_dt,
        });
    }

    let dim = basis.dim();
    let ht = build_target_hamiltonian(readout_model, &basis);
    // sigma_z blocks: H_t +/- (g n + Delta_p/2)
    let mut evolved: Vec<Array2<Complex64>> = Vec::with_capacity(2);
    for sign in [1.0f64, -1.0] {
        let mut block = ht.clone();
        for i in 0..dim {
            let n = basis.charge_at(i) as f64;
            block[[i, i]] += sign * (probe.g * n + probe.delta_p / 2.0);
        }
        let (vals, vecs) = linalg::eigh_real_full(&block)?;
        // amplitudes of the prepared state in the block eigenbasis
        let mut amp = Array1::<Complex64>::zeros(dim);
        for q in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                acc += vecs[[i, q]] * prepared.coefficients()[i];
            }
            amp[q] = acc / Complex64::new(std::f64::consts::SQRT_2, 0.0);
        }
        // psi_s(t) in the charge basis for every grid point
        let nt = grid.len();
        let mut psi_t = Array2::<Complex64>::zeros((nt, dim));
        for (ti, &t) in grid.times().iter().enumerate() {
            for q in 0..dim {
                let phase = Complex64::from_polar(1.0, -vals[q] * t) * amp[q];
                if phase.norm_sqr() == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    psi_t[[ti, i]] += vecs[[i, q]] * phase;
                }
            }
        }
        evolved.push(psi_t);
    }

    let nt = grid.len();
    let mut sigma_x = Array1::zeros(nt);
    for ti in 0..nt {
        let mut overlap = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            overlap += evolved[0][[ti, i]].conj() * evolved[1][[ti, i]];
        }
        sigma_x[ti] = 2.0 * overlap.re;
    }

    Ok(RamseyRecord {
        times: grid.times().clone(),
        sigma_x,
        residual_ej: readout_model.ej,
        probe: *probe,
    })
}

/// Additive Gaussian measurement noise on the sigma_x samples (Box-Muller on
/// a seeded ChaCha stream, so records are reproducible).
pub fn apply_measurement_noise(record: &RamseyRecord, std: f64, seed: u64) -> RamseyRecord {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = record.clone();
    let mut pending: Option<f64> = None;
    for x in out.sigma_x.iter_mut() {
        let z = match pending.take() {
            Some(z) => z,
            None => {
                let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let u2: f64 = rng.random();
                let r = (-2.0 * u1.ln()).sqrt();
                let ang = 2.0 * std::f64::consts::PI * u2;
                pending = Some(r * ang.sin());
                r * ang.cos()
            }
        };
        *x += std * z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargemodel::{charge_probabilities, ground_state};
    use approx::assert_abs_diff_eq;

    fn probs_of(wf: &ChargeWavefunction) -> Vec<(i32, f64)> {
        let p = charge_probabilities(wf);
        wf.basis().charges().zip(p.iter().copied()).collect()
    }

    #[test]
    fn coupled_hamiltonian_block_diagonal() {
        let model = TargetModel::new(1.0, 2.0, 0.1).unwrap();
        let probe = ProbeSpec::new(5.0, 0.2).unwrap();
        let basis = ChargeBasis::new(3);
        let h = build_coupled_hamiltonian(&model, &probe, &basis);
        let dim = basis.dim();
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(h[[i, dim + j]], 0.0);
                assert_eq!(h[[dim + i, j]], 0.0);
            }
        }
        // EJ = 0 makes the whole thing diagonal with entries 4EC(n-ng)^2 +/- (gn + Dp/2)
        let model0 = TargetModel::new(1.0, 0.0, 0.0).unwrap();
        let h0 = build_coupled_hamiltonian(&model0, &probe, &basis);
        for (i, n) in basis.charges().enumerate() {
            let charging = 4.0 * (n as f64).powi(2);
            let shift = probe.g * n as f64 + probe.delta_p / 2.0;
            assert_abs_diff_eq!(h0[[i, i]], charging + shift, epsilon = 1e-14);
            assert_abs_diff_eq!(h0[[dim + i, dim + i]], charging - shift, epsilon = 1e-14);
        }
    }

    #[test]
    fn analytic_signal_special_cases() {
        let probe = ProbeSpec::new(3.0, 0.5).unwrap();
        assert_abs_diff_eq!(analytic_sigma_x(&[(0, 1.0)], &probe, 0.0), 1.0, epsilon = 0.0);
        let t = 0.73;
        assert_abs_diff_eq!(
            analytic_sigma_x(&[(0, 1.0)], &probe, t),
            (probe.delta_p * t).cos(),
            epsilon = 1e-15
        );
        // p_{+1} = p_{-1} = 1/2 -> cos(Dp t) cos(2g t)
        let probs = [(1, 0.5), (-1, 0.5)];
        assert_abs_diff_eq!(
            analytic_sigma_x(&probs, &probe, t),
            (probe.delta_p * t).cos() * (2.0 * probe.g * t).cos(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn ideal_quench_matches_closed_form() {
        let model = TargetModel::new(1.0, 50.0, 0.0).unwrap();
        let prepared = ground_state(&model).unwrap();
        let readout = TargetModel::new(1.0, 0.0, 0.0).unwrap();
        let probe = ProbeSpec::new(12.0, 0.4).unwrap();
        let grid = TimeGrid::protocol_default(&probe, &prepared.basis()).unwrap();
        let record = simulate_protocol(&prepared, &readout, &probe, &grid).unwrap();
        assert_abs_diff_eq!(record.sigma_x[0], 1.0, epsilon = 1e-12);
        let probs = probs_of(&prepared);
        let mut worst = 0.0f64;
        for (ti, &t) in record.times.iter().enumerate() {
            let reference = analytic_sigma_x(&probs, &probe, t);
            worst = worst.max((record.sigma_x[ti] - reference).abs());
            assert!(record.sigma_x[ti].abs() <= 1.0 + 1e-12);
        }
        assert!(worst <= 1e-9, "max deviation {worst}");
    }

    #[test]
    fn basis_state_gives_pure_cosine() {
        let basis = ChargeBasis::new(4);
        let prepared = ChargeWavefunction::charge_state(basis, 0);
        let readout = TargetModel::new(1.0, 0.0, 0.0).unwrap();
        let probe = ProbeSpec::new(7.0, 0.3).unwrap();
        let grid = TimeGrid::protocol_default(&probe, &basis).unwrap();
        let record = simulate_protocol(&prepared, &readout, &probe, &grid).unwrap();
        for (ti, &t) in record.times.iter().enumerate() {
            assert_abs_diff_eq!(record.sigma_x[ti], (probe.delta_p * t).cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn nyquist_violation_reported() {
        let basis = ChargeBasis::new(4);
        let prepared = ChargeWavefunction::charge_state(basis, 0);
        let readout = TargetModel::new(1.0, 0.0, 0.0).unwrap();
        let probe = ProbeSpec::new(50.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(100.0, 128).unwrap();
        match simulate_protocol(&prepared, &readout, &probe, &grid) {
            Err(CoreError::NyquistViolation { omega, .. }) => {
                assert_abs_diff_eq!(omega, 58.0, epsilon = 1e-12);
            }
            other => panic!("expected Nyquist error, got {other:?}"),
        }
    }

    #[test]
    fn norm_and_energy_conserved() {
        let model = TargetModel::new(1.0, 50.0, 0.0).unwrap();
        let prepared = ground_state(&model).unwrap();
        let readout = TargetModel::new(1.0, 0.5, 0.0).unwrap();
        let probe = ProbeSpec::new(12.0, 0.4).unwrap();
        let basis = prepared.basis();
        let grid = TimeGrid::uniform(10.0, 256).unwrap();

        // re-derive the evolved state directly and track <H> and the norm
        let h = build_coupled_hamiltonian(&readout, &probe, &basis);
        let (vals, vecs) = crate::linalg::eigh_real_full(&h).unwrap();
        let dim = basis.dim();
        let mut psi0 = Array1::<Complex64>::zeros(2 * dim);
        for i in 0..dim {
            psi0[i] = prepared.coefficients()[i] / Complex64::new(std::f64::consts::SQRT_2, 0.0);
            psi0[dim + i] = psi0[i];
        }
        let amps: Vec<Complex64> = (0..2 * dim)
            .map(|q| {
                (0..2 * dim)
                    .map(|i| vecs[[i, q]] * psi0[i])
                    .sum::<Complex64>()
            })
            .collect();
        let e0: f64 = amps.iter().zip(vals.iter()).map(|(a, &e)| a.norm_sqr() * e).sum();
        for &t in grid.times().iter() {
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            let energy: f64 = amps
                .iter()
                .zip(vals.iter())
                .map(|(a, &e)| (Complex64::from_polar(1.0, -e * t) * a).norm_sqr() * e)
                .sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
            assert!((energy - e0).abs() <= 1e-10 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let basis = ChargeBasis::new(2);
        let prepared = ChargeWavefunction::charge_state(basis, 0);
        let readout = TargetModel::new(1.0, 0.0, 0.0).unwrap();
        let probe = ProbeSpec::new(5.0, 0.5).unwrap();
        let grid = TimeGrid::uniform(20.0, 512).unwrap();
        let record = simulate_protocol(&prepared, &readout, &probe, &grid).unwrap();
        let a = apply_measurement_noise(&record, 1e-3, 42);
        let b = apply_measurement_noise(&record, 1e-3, 42);
        let c = apply_measurement_noise(&record, 1e-3, 43);
        assert_eq!(a.sigma_x, b.sigma_x);
        assert_ne!(a.sigma_x, c.sigma_x);
    }
}
