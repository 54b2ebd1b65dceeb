//! Numerical engine for charge-basis tomography of superconducting circuits.
//!
//! The crate is organized around four subsystems:
//!
//! - [`chargemodel`]: single-island junction Hamiltonians in the truncated
//!   charge basis, their spectra, and harmonic-regime closed forms.
//! - [`ramsey`]: the quench-and-Ramsey readout protocol — coupled
//!   target/probe evolution, sigma_x records, and spectral probability
//!   extraction.
//! - [`tomography`]: adiabatic measurement maps, constrained least-squares
//!   reconstruction of the charge-basis density matrix, and model validation
//!   via Hilbert-Schmidt distances.
//! - [`circuit`]: quantization of the four-junction flux-qubit / resonator /
//!   transmon circuit — capacitance-matrix analysis, flux-qubit spectra, and
//!   the derived coupling constants.

pub mod chargemodel;
pub mod circuit;
pub mod constants;
pub mod csvio;
pub mod error;
pub mod linalg;
pub mod ramsey;
pub mod tomography;

pub use chargemodel::{
    analytic_coefficient, analytic_state, build_target_hamiltonian, charge_probabilities,
    eigensystem, ground_state, plasma_frequency, solve_model, ChargeBasis, ChargeWavefunction,
    EigenSystem, TargetModel,
};
pub use circuit::{
    capacitance_matrix, coupling_strengths, derived_capacitances, flux_qubit_eigensystem, sweep,
    CapacitanceMatrix, CircuitSpec, CouplingSet, DerivedCapacitances, FluxQubitSubspace,
    SweepParameter, SweepTable,
};
pub use error::{CoreError, Result};
pub use ramsey::{
    analytic_sigma_x, apply_measurement_noise, build_coupled_hamiltonian, extract_probabilities,
    periodogram, residual_ej_scan, simulate_protocol, ProbeSpec, RamseyRecord, ScanTable,
    SpectralPeaks, TimeGrid,
};
pub use tomography::{
    adiabatic_transform, build_numeric_maps, diagonal_distance, hilbert_schmidt_distance,
    measurement_map_analytic, measurement_map_numeric, plan_configurations, project_physical,
    simulate_measurements, solve_reconstruction, validate_model, AdiabaticTransform, ConfigPlan,
    DensityMatrix, MeasurementMap, ReconstructionProblem, ReconstructionResult, SolverMode,
    ValidationRow,
};
