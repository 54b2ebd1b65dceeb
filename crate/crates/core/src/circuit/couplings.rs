//! Coupling constants of the probe-resonator-transmon circuit.
//!
//! The island charge bracket B = alpha (n1 + n2) + (1 + alpha)(n3 - ng)
//! couples to both the resonator charge q4 and the transmon charge q5.
//! Longitudinal couplings are <-|.|+> matrix elements in the qubit doublet,
//! transverse ones <0|.|1>; the probe-transmon pair is tied to the
//! probe-resonator pair by the exact impedance scaling sqrt(4 e^2 Z_r / hbar).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::fluxqubit::{flux_qubit_eigensystem, FluxQubitOptions, FluxQubitSubspace, NodeBasis};
use crate::circuit::{derived_capacitances, CircuitSpec};
use crate::constants;
use crate::error::{CoreError, Result};

/// Derived coupling energies (GHz as E/h), resonator impedance and frequency.
#[derive(Debug, Clone, Copy)]
pub struct CouplingSet {
    pub delta_p: f64,
    pub g_par_pc: Complex64,
    pub g_perp_pc: Complex64,
    pub g_par_pt: Complex64,
    pub g_perp_pt: Complex64,
    pub g_perp_ct: f64,
    /// ohm
    pub z_r: f64,
    /// GHz
    pub omega_r: f64,
    /// Effective sigma_z n coupling g_tp = g_par_pt + 2 g_perp_ct g_par_pc / omega_r.
    pub g_tp: Complex64,
}

impl CouplingSet {
    /// sqrt(4 e^2 Z_r / hbar), the exact pt/pc scaling factor.
    pub fn pt_over_pc(z_r: f64) -> f64 {
        (4.0 * constants::E_CHARGE * constants::E_CHARGE * z_r / constants::HBAR).sqrt()
    }
}

/// Couplings from a precomputed qubit subspace.
pub fn coupling_strengths_from(
    spec: &CircuitSpec,
    subspace: &FluxQubitSubspace,
) -> Result<CouplingSet> {
    let derived = derived_capacitances(spec)?;
    let ec_scale = constants::EC_GHZ_PER_INV_FF / spec.cjp;
    if subspace.delta_p < 1e-6 * ec_scale {
        return Err(CoreError::DegenerateDoublet {
            gap: subspace.delta_p,
            threshold: 1e-6 * ec_scale,
        });
    }
    let alpha = spec.alpha();
    let basis = NodeBasis::new(subspace.np);
    let dim = basis.dim();
    let v0 = &subspace.states[0];
    let v1 = &subspace.states[1];
    if v0.len() != dim || v1.len() != dim {
        return Err(CoreError::ShapeMismatch(
            "subspace states do not match their node basis".into(),
        ));
    }

    // bracket matrix elements <a|B|b>, B diagonal in the charge basis
    let mut b00 = Complex64::new(0.0, 0.0);
    let mut b11 = Complex64::new(0.0, 0.0);
    let mut b01 = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        let (n1, n2, n3) = basis.charges(i);
        let b = alpha * (n1 + n2) as f64 + (1.0 + alpha) * (n3 as f64 - spec.ng_p);
        b00 += v0[i].conj() * b * v0[i];
        b11 += v1[i].conj() * b * v1[i];
        b01 += v0[i].conj() * b * v1[i];
    }
    // <-|B|+> = (B00 - B11)/2 + i Im B01 for Hermitian B
    let b_long = (b00 - b11) / 2.0 + Complex64::new(0.0, b01.im);
    let b_perp = b01;

    // H_pc = (Ccp~/C0^2) * 2e * B, in volts
    let volts_per_bracket =
        (derived.ccp_t / derived.c0_sq) / constants::FEMTOFARAD * 2.0 * constants::E_CHARGE;
    let charge_scale = (constants::HBAR / (2.0 * derived.z_r)).sqrt();
    let to_ghz = |z: Complex64| z * charge_scale * volts_per_bracket / constants::PLANCK_H / 1e9;
    let g_par_pc = to_ghz(b_long);
    let g_perp_pc = to_ghz(b_perp);

    let scaling = CouplingSet::pt_over_pc(derived.z_r);
    let g_par_pt = g_par_pc * scaling;
    let g_perp_pt = g_perp_pc * scaling;

    let bracket_ct = 2.0 * spec.cct * (2.0 * spec.cjp * alpha + spec.ccp * (1.0 + alpha))
        / (spec.cjp * derived.c0_sq)
        / constants::FEMTOFARAD;
    let g_perp_ct = (2.0 * constants::HBAR * constants::E_CHARGE * constants::E_CHARGE
        / derived.z_r)
        .sqrt()
        * bracket_ct
        / constants::PLANCK_H
        / 1e9;

    let g_tp = g_par_pt + g_par_pc * (2.0 * g_perp_ct / derived.omega_r);

    Ok(CouplingSet {
        delta_p: subspace.delta_p,
        g_par_pc,
        g_perp_pc,
        g_par_pt,
        g_perp_pt,
        g_perp_ct,
        z_r: derived.z_r,
        omega_r: derived.omega_r,
        g_tp,
    })
}

/// Diagonalize the probe and evaluate all couplings.
pub fn coupling_strengths(spec: &CircuitSpec, opts: &FluxQubitOptions) -> Result<CouplingSet> {
    let subspace = flux_qubit_eigensystem(spec, opts)?;
    coupling_strengths_from(spec, &subspace)
}

/// Which circuit parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Island offset charge n_g^(p).
    NgP,
    /// Probe-resonator coupling capacitance C_cp (fF).
    Ccp,
    /// Symmetric junction scaling (alpha_L = alpha_R = value).
    Alpha,
    /// Junction asymmetry delta alpha = alpha_R - alpha_L (alpha_L fixed).
    DeltaAlpha,
}

impl SweepParameter {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParameter::NgP => "ng_p",
            SweepParameter::Ccp => "ccp_fF",
            SweepParameter::Alpha => "alpha",
            SweepParameter::DeltaAlpha => "delta_alpha",
        }
    }

    fn apply(&self, spec: &CircuitSpec, value: f64) -> CircuitSpec {
        let mut out = *spec;
        match self {
            SweepParameter::NgP => out.ng_p = value,
            SweepParameter::Ccp => out.ccp = value,
            SweepParameter::Alpha => {
                out.alpha_l = value;
                out.alpha_r = value;
            }
            SweepParameter::DeltaAlpha => out.alpha_r = out.alpha_l + value,
        }
        out
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub value: f64,
    pub couplings: CouplingSet,
}

/// Gap and couplings along a parameter grid.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
}

/// Evaluate the couplings over a grid; points run in parallel and the table
/// preserves grid order regardless of schedule.
pub fn sweep(
    spec: &CircuitSpec,
    parameter: SweepParameter,
    grid: &[f64],
    opts: &FluxQubitOptions,
) -> Result<SweepTable> {
    let points = grid
        .par_iter()
        .map(|&value| {
            let local = parameter.apply(spec, value);
            let couplings = coupling_strengths(&local, opts)?;
            Ok(SweepPoint { value, couplings })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { parameter, points })
}
