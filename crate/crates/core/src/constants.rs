//! Physical constants and unit conversions.
//!
//! Circuit quantities are expressed in laboratory units (capacitance in fF,
//! inductance in nH, energies as E/h in GHz); everything here funnels through
//! SI once so conversion factors live in a single place.

/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant, J·s.
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK_H / (2.0 * std::f64::consts::PI);

/// One femtofarad in farads.
pub const FEMTOFARAD: f64 = 1e-15;

/// One nanohenry in henries.
pub const NANOHENRY: f64 = 1e-9;

/// Charging-energy scale e^2/(2C) expressed as E/h in GHz for C = 1 fF.
/// Divide by the capacitance in fF to get the charging energy.
pub const EC_GHZ_PER_INV_FF: f64 = E_CHARGE * E_CHARGE / (2.0 * FEMTOFARAD * PLANCK_H) / 1e9;

/// Convert an energy in joules to E/h in GHz.
pub fn joule_to_ghz(energy: f64) -> f64 {
    energy / PLANCK_H / 1e9
}
