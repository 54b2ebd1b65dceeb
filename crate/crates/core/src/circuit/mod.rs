//! Quantization of the four-junction flux-qubit / resonator / transmon
//! circuit.
//!
//! Node fluxes phi_1..phi_5 follow the fixed topology: nodes 1-3 form the
//! flux-qubit loop (two full junctions to ground, two alpha-scaled junctions
//! meeting at the island node 3), node 4 is the LC resonator coupled to the
//! island through C_cp, node 5 the transmon coupled through C_ct. Energies
//! are E/h in GHz, capacitances in fF, inductances in nH.

pub mod couplings;
pub mod fluxqubit;

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

use crate::constants;
use crate::error::{CoreError, Result};

pub use couplings::{coupling_strengths, sweep, CouplingSet, SweepParameter, SweepPoint, SweepTable};
pub use fluxqubit::{flux_qubit_eigensystem, FluxQubitOptions, FluxQubitSubspace};

/// All circuit element values. The two alpha junctions may differ in
/// Josephson energy (delta-alpha studies); their capacitances use `alpha_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSpec {
    /// Probe junction Josephson energy, GHz.
    pub ejp: f64,
    /// Target (transmon) junction Josephson energy, GHz.
    pub ejt: f64,
    pub alpha_l: f64,
    pub alpha_r: f64,
    /// External flux through the qubit loop, in flux quanta.
    pub f_p: f64,
    /// Offset charge on the alpha-junction island (node 3), Cooper pairs.
    pub ng_p: f64,
    /// Capacitances, fF.
    pub cjp: f64,
    pub cjt: f64,
    pub ct: f64,
    pub cg: f64,
    pub ccp: f64,
    pub cct: f64,
    pub cr: f64,
    /// Resonator inductance, nH.
    pub lr: f64,
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("EJp", self.ejp),
            ("CJp", self.cjp),
            ("CJt", self.cjt),
            ("Ct", self.ct),
            ("Cct", self.cct),
            ("Cr", self.cr),
            ("Lr", self.lr),
            ("alpha_L", self.alpha_l),
            ("alpha_R", self.alpha_r),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        for (name, v) in [("Cg", self.cg), ("Ccp", self.ccp), ("EJt", self.ejt)] {
            if !(v >= 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.f_p) {
            return Err(CoreError::InvalidParameter(format!(
                "f_p must lie in [0, 1), got {}",
                self.f_p
            )));
        }
        Ok(())
    }

    /// Symmetric alpha used on the capacitance side.
    pub fn alpha(&self) -> f64 {
        self.alpha_l
    }

    /// C_{t,Sigma} = C_Jt + C_t.
    pub fn ct_sigma(&self) -> f64 {
        self.cjt + self.ct
    }

    /// Canonical parameter set used by the shipped presets:
    /// EJp/h = 121 GHz, EJt/h = 5 GHz, alpha = 0.4, f_p = 1/2, CJp = 8 fF,
    /// CJt = 4 fF, Ct = 40 fF, Ccp = Cct = 5 fF, Cr = 100 fF, Lr = 10 nH.
    pub fn reference() -> Self {
        Self {
            ejp: 121.0,
            ejt: 5.0,
            alpha_l: 0.4,
            alpha_r: 0.4,
            f_p: 0.5,
            ng_p: 0.25,
            cjp: 8.0,
            cjt: 4.0,
            ct: 40.0,
            cg: 0.0,
            ccp: 5.0,
            cct: 5.0,
            cr: 100.0,
            lr: 10.0,
        }
    }
}

/// The 5x5 node capacitance matrix (fF), symmetric positive definite.
#[derive(Debug, Clone)]
pub struct CapacitanceMatrix {
    matrix: Array2<f64>,
}

impl CapacitanceMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }
}

/// Assemble the node capacitance matrix of the fixed topology.
pub fn capacitance_matrix(spec: &CircuitSpec) -> Result<CapacitanceMatrix> {
    spec.validate()?;
    let a = spec.alpha();
    let cjp = spec.cjp;
    let m = ndarray::array![
        [(1.0 + a) * cjp, 0.0, -a * cjp, 0.0, 0.0],
        [0.0, (1.0 + a) * cjp, -a * cjp, 0.0, 0.0],
        [-a * cjp, -a * cjp, 2.0 * a * cjp + spec.ccp, -spec.ccp, 0.0],
        [
            0.0,
            0.0,
            -spec.ccp,
            spec.cr + spec.ccp + spec.cct,
            -spec.cct
        ],
        [0.0, 0.0, 0.0, -spec.cct, spec.cct + spec.ct_sigma()],
    ];
    let (vals, _) = m
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::EigenSolve(e.to_string()))?;
    if vals[0] <= 0.0 {
        return Err(CoreError::NotPositiveDefinite { eigenvalue: vals[0] });
    }
    Ok(CapacitanceMatrix { matrix: m })
}

/// Closed-form constants of the inverted capacitance matrix.
///
/// `omega_r` is stored as E/h in GHz (so hbar omega_r = h * omega_r_ghz) and
/// `z_r` in ohms; `ec_t` is the renormalized transmon charging energy in GHz.
#[derive(Debug, Clone, Copy)]
pub struct DerivedCapacitances {
    /// fF^2
    pub c0_sq: f64,
    /// fF
    pub cp0: f64,
    /// fF
    pub cp1: f64,
    /// fF
    pub ccp_t: f64,
    /// fF
    pub cr_t: f64,
    /// fF
    pub ct_t: f64,
    /// GHz
    pub ec_t: f64,
    /// GHz
    pub omega_r: f64,
    /// ohm
    pub z_r: f64,
}

impl DerivedCapacitances {
    /// Coefficient of (q1^2 + q2^2) in the charging form, 1/fF.
    pub fn coef_a(&self, alpha: f64) -> f64 {
        (self.cp0 * (2.0 + alpha) * alpha + self.cp1 * (1.0 + alpha))
            / (2.0 * (1.0 + alpha) * self.c0_sq)
    }

    /// Coefficient of q1 q2, 1/fF.
    pub fn coef_b(&self, alpha: f64) -> f64 {
        self.cp0 * alpha * alpha / ((1.0 + alpha) * self.c0_sq)
    }

    /// Coefficient of (q1 + q2) q3, 1/fF.
    pub fn coef_c(&self, alpha: f64) -> f64 {
        self.cp0 * alpha / self.c0_sq
    }

    /// Coefficient of q3^2, 1/fF.
    pub fn coef_d(&self, alpha: f64) -> f64 {
        self.cp0 * (1.0 + alpha) / (2.0 * self.c0_sq)
    }
}

/// Evaluate the closed forms for the derived capacitances and the resonator
/// constants.
pub fn derived_capacitances(spec: &CircuitSpec) -> Result<DerivedCapacitances> {
    spec.validate()?;
    let a = spec.alpha();
    let cjp = spec.cjp;
    let cts = spec.ct_sigma();
    let (cr, ccp, cct) = (spec.cr, spec.ccp, spec.cct);

    let c0_sq = 2.0 * (cts * (cr + cct + ccp) + cct * (cr + ccp)) * a
        + (ccp / cjp) * (cts * (cr + cct) + cr * cct) * (1.0 + a);
    if c0_sq <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "degenerate charging form: C0^2 = {c0_sq}"
        )));
    }
    let cp0 = (cts * (cr + ccp + cct) + cct * (cr + ccp)) / cjp;
    let cp1 = (ccp / (cjp * cjp)) * ((cct + cr) * cts + cct * cr);
    let ccp_t = ccp * (cct + cts) / cjp;
    let cr_t = cjp * c0_sq / ((cts + cct) * (2.0 * cjp * a + ccp * (1.0 + a)));
    let ct_t = cjp * c0_sq
        / (2.0 * cjp * (cr + ccp + cct) * a + ccp * (cct + cr) * (1.0 + a));

    let ec_t = constants::EC_GHZ_PER_INV_FF / ct_t;
    // omega_r = 1 / (2 sqrt(Lr Cr~)); reported as omega/2pi in GHz
    let lr_si = spec.lr * constants::NANOHENRY;
    let cr_si = cr_t * constants::FEMTOFARAD;
    let omega_r_rad = 1.0 / (2.0 * (lr_si * cr_si).sqrt());
    let omega_r = omega_r_rad / (2.0 * std::f64::consts::PI) / 1e9;
    let z_r = (lr_si / cr_si).sqrt();

    Ok(DerivedCapacitances {
        c0_sq,
        cp0,
        cp1,
        ccp_t,
        cr_t,
        ct_t,
        ec_t,
        omega_r,
        z_r,
    })
}
