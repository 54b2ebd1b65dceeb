//! Harmonic-regime closed forms for the transmon eigenstates.
//!
//! For E_J >> E_C the charge-basis coefficients of level k follow a
//! Hermite-Gaussian profile
//!
//!   c_n^k  ∝  i^k exp(-(n - n_g)^2 / 2 beta^2) He_k((n - n_g) / beta),
//!
//! with beta = (E_J/8E_C)^(1/4) and He_k the probabilists' Hermite
//! polynomials. The closed-form prefactor does not normalize the discrete
//! family, so the coefficient vector is renormalized to unit norm over the
//! truncated basis; the diagonalization path is the arbiter of correctness.

use ndarray::Array1;
use num_complex::Complex64;

use crate::chargemodel::{ChargeBasis, ChargeWavefunction, TargetModel};
use crate::error::{CoreError, Result};

/// Probabilists' Hermite polynomial He_k(x) by the three-term recurrence.
pub fn hermite_prob(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for m in 1..k {
                let next = x * cur - m as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn i_power(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Level-k Hermite-Gaussian state on `basis`, renormalized to unit norm.
///
/// Valid in the harmonic regime E_J/E_C >~ 1; requires E_J > 0.
pub fn analytic_state(
    k: usize,
    model: &TargetModel,
    basis: &ChargeBasis,
) -> Result<ChargeWavefunction> {
    if model.ej <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "analytic transmon state needs EJ > 0".into(),
        ));
    }
    let beta = model.beta();
    let mut c = Array1::zeros(basis.dim());
    for (i, n) in basis.charges().enumerate() {
        let x = (n as f64 - model.ng) / beta;
        c[i] = Complex64::new((-0.5 * x * x).exp() * hermite_prob(k, x), 0.0);
    }
    let norm_sq: f64 = c.iter().map(|z: &Complex64| z.norm_sqr()).sum();
    if norm_sq <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "analytic level {k} vanishes on the given truncation"
        )));
    }
    let scale = i_power(k) / norm_sq.sqrt();
    c.mapv_inplace(|z| z * scale);
    ChargeWavefunction::new(*basis, c)
}

/// Single coefficient c_n^k of the renormalized analytic family.
pub fn analytic_coefficient(
    k: usize,
    model: &TargetModel,
    basis: &ChargeBasis,
    n: i32,
) -> Result<Complex64> {
    Ok(analytic_state(k, model, basis)?.coefficient(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargemodel::{charge_probabilities, ground_state};
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_recurrence_values() {
        // He_2 = x^2 - 1, He_3 = x^3 - 3x
        assert_abs_diff_eq!(hermite_prob(2, 1.5), 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(hermite_prob(3, 2.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hermite_prob(5, 0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn odd_level_vanishes_at_center() {
        let model = TargetModel::new(1.0, 50.0, 0.0).unwrap();
        let basis = ChargeBasis::default_for(&model);
        let c = analytic_coefficient(1, &model, &basis, 0).unwrap();
        assert_abs_diff_eq!(c.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_amplitude_ratio() {
        // c_1/c_0 = exp(-1/(2 beta^2)) = exp(-0.2) at E_J/E_C = 50
        let model = TargetModel::new(1.0, 50.0, 0.0).unwrap();
        let basis = ChargeBasis::default_for(&model);
        let c0 = analytic_coefficient(0, &model, &basis, 0).unwrap();
        let c1 = analytic_coefficient(0, &model, &basis, 1).unwrap();
        assert_abs_diff_eq!((c1 / c0).re, (-0.2f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!((c1 / c0).re, 0.818_730_753_077_982, epsilon = 1e-12);
    }

    #[test]
    fn ground_state_overlap_with_numeric() {
        for ratio in [10.0, 50.0] {
            let model = TargetModel::new(1.0, ratio, 0.0).unwrap();
            let gs = ground_state(&model).unwrap();
            let ana = analytic_state(0, &model, &gs.basis()).unwrap();
            let overlap: Complex64 = gs
                .coefficients()
                .iter()
                .zip(ana.coefficients().iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!(
                overlap.norm() >= 0.999,
                "overlap {} at EJ/EC={ratio}",
                overlap.norm()
            );
        }
    }

    #[test]
    fn analytic_probabilities_track_numeric() {
        let model = TargetModel::new(1.0, 50.0, 0.0).unwrap();
        let gs = ground_state(&model).unwrap();
        let p = charge_probabilities(&gs);
        let b = gs.basis();
        // Gaussian estimate p_0 ~ 1/(beta sqrt(pi))
        let beta = model.beta();
        let p0_est = 1.0 / (beta * std::f64::consts::PI.sqrt());
        assert!((p[b.index_of(0)] - p0_est).abs() / p0_est < 0.03);
        let ana = analytic_state(0, &model, &b).unwrap();
        for n in -3..=3 {
            let pa = ana.coefficient(n).norm_sqr();
            let pn = p[b.index_of(n)];
            assert!((pa - pn).abs() < 2e-3, "n={n}: {pa} vs {pn}");
        }
    }
}
