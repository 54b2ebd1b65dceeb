//! CSV and structured-record emitters.
//!
//! One dialect everywhere: comma separator, `.` decimal point, scientific
//! notation with 17 significant digits (so emitted values round-trip to the
//! exact f64 bit pattern), mandatory header row. Deterministic byte-for-byte
//! output is part of the contract.

use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;

use crate::chargemodel::ChargeBasis;
use crate::error::Result;
use crate::ramsey::{Periodogram, RamseyRecord, ScanTable, SpectralPeaks};
use crate::tomography::{ReconstructionProblem, ReconstructionResult, ValidationRow};

/// 17 significant digits, scientific.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_row<W: Write>(w: &mut W, fields: &[String]) -> Result<()> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}

fn write_header<W: Write>(w: &mut W, names: &[&str]) -> Result<()> {
    writeln!(w, "{}", names.join(","))?;
    Ok(())
}

/// (t, sigma_x) rows of a Ramsey record.
pub fn write_ramsey_record<W: Write>(w: &mut W, record: &RamseyRecord) -> Result<()> {
    write_header(w, &["t", "sigma_x"])?;
    for (t, s) in record.times.iter().zip(record.sigma_x.iter()) {
        write_row(w, &[fmt_f64(*t), fmt_f64(*s)])?;
    }
    Ok(())
}

/// (n, omega, amplitude) rows of extracted peaks.
pub fn write_peaks<W: Write>(w: &mut W, peaks: &SpectralPeaks) -> Result<()> {
    write_header(w, &["n", "omega", "amplitude"])?;
    for &(n, omega, amp) in peaks.entries() {
        write_row(w, &[n.to_string(), fmt_f64(omega), fmt_f64(amp)])?;
    }
    Ok(())
}

/// (frequency, amplitude) rows of a periodogram.
pub fn write_periodogram<W: Write>(w: &mut W, pg: &Periodogram) -> Result<()> {
    write_header(w, &["frequency", "amplitude"])?;
    for (f, a) in pg.frequency.iter().zip(pg.amplitude.iter()) {
        write_row(w, &[fmt_f64(*f), fmt_f64(*a)])?;
    }
    Ok(())
}

/// (EJ_over_EC, n, amplitude) rows of a residual-EJ scan.
pub fn write_scan<W: Write>(w: &mut W, table: &ScanTable) -> Result<()> {
    write_header(w, &["EJ_over_EC", "n", "amplitude"])?;
    for row in &table.rows {
        for &(n, _, amp) in row.peaks.entries() {
            write_row(w, &[fmt_f64(row.ej_over_ec), n.to_string(), fmt_f64(amp)])?;
        }
    }
    Ok(())
}

/// (EJ_over_EC, q, energy) eigenvalue rows.
pub fn write_levels<W: Write>(w: &mut W, rows: &[(f64, usize, f64)]) -> Result<()> {
    write_header(w, &["EJ_over_EC", "q", "energy"])?;
    for &(ratio, q, e) in rows {
        write_row(w, &[fmt_f64(ratio), q.to_string(), fmt_f64(e)])?;
    }
    Ok(())
}

/// (EJ_over_EC, n, p) charge-probability rows.
pub fn write_probabilities<W: Write>(w: &mut W, rows: &[(f64, i32, f64)]) -> Result<()> {
    write_header(w, &["EJ_over_EC", "n", "p"])?;
    for &(ratio, n, p) in rows {
        write_row(w, &[fmt_f64(ratio), n.to_string(), fmt_f64(p)])?;
    }
    Ok(())
}

/// (j, k, re, im) rows of a density matrix on a charge window.
pub fn write_density_matrix<W: Write>(
    w: &mut W,
    rho: &Array2<Complex64>,
    basis: &ChargeBasis,
) -> Result<()> {
    write_header(w, &["j", "k", "re", "im"])?;
    for (ji, j) in basis.charges().enumerate() {
        for (ki, k) in basis.charges().enumerate() {
            let z = rho[[ji, ki]];
            write_row(
                w,
                &[j.to_string(), k.to_string(), fmt_f64(z.re), fmt_f64(z.im)],
            )?;
        }
    }
    Ok(())
}

/// (j, k, absdiff) rows comparing two matrices on the same window.
pub fn write_absdiff<W: Write>(
    w: &mut W,
    a: &Array2<Complex64>,
    b: &Array2<Complex64>,
    basis: &ChargeBasis,
) -> Result<()> {
    write_header(w, &["j", "k", "absdiff"])?;
    for (ji, j) in basis.charges().enumerate() {
        for (ki, k) in basis.charges().enumerate() {
            let d = (a[[ji, ki]] - b[[ji, ki]]).norm();
            write_row(w, &[j.to_string(), k.to_string(), fmt_f64(d)])?;
        }
    }
    Ok(())
}

/// (count, hs_distance, diag_distance) rows of a model-validation study.
pub fn write_validation<W: Write>(w: &mut W, rows: &[ValidationRow]) -> Result<()> {
    write_header(w, &["count", "hs_distance", "diag_distance"])?;
    for row in rows {
        write_row(
            w,
            &[
                row.count.to_string(),
                fmt_f64(row.hs_distance),
                fmt_f64(row.diag_distance),
            ],
        )?;
    }
    Ok(())
}

/// Circuit sweep table with the fixed column order. Longitudinal couplings
/// are emitted as signed real parts, transverse ones as magnitudes.
pub fn write_sweep<W: Write>(w: &mut W, table: &crate::circuit::SweepTable) -> Result<()> {
    write_header(
        w,
        &[
            table.parameter.label(),
            "delta_p_GHz",
            "g_par_pc_MHz",
            "g_perp_pc_MHz",
            "g_par_pt_MHz",
            "g_perp_pt_MHz",
            "g_perp_ct_MHz",
            "g_tp_MHz",
        ],
    )?;
    for p in &table.points {
        let c = &p.couplings;
        write_row(
            w,
            &[
                fmt_f64(p.value),
                fmt_f64(c.delta_p),
                fmt_f64(c.g_par_pc.re * 1e3),
                fmt_f64(c.g_perp_pc.norm() * 1e3),
                fmt_f64(c.g_par_pt.re * 1e3),
                fmt_f64(c.g_perp_pt.norm() * 1e3),
                fmt_f64(c.g_perp_ct * 1e3),
                fmt_f64(c.g_tp.re * 1e3),
            ],
        )?;
    }
    Ok(())
}

/// Structured text record of a reconstruction problem: the configuration
/// list with measured diagonals.
pub fn write_problem_record<W: Write>(w: &mut W, problem: &ReconstructionProblem) -> Result<()> {
    writeln!(w, "ej0 = {}", fmt_f64(problem.map_model.ej))?;
    writeln!(w, "ec = {}", fmt_f64(problem.map_model.ec))?;
    writeln!(w, "ej2 = {}", fmt_f64(problem.map_model.ej2))?;
    writeln!(w, "ng = {}", fmt_f64(problem.map_model.ng))?;
    writeln!(w, "n_rep = {}", problem.n_rep)?;
    writeln!(w, "visibility_floor = {}", fmt_f64(problem.visibility_floor))?;
    for cfg in &problem.configs {
        writeln!(w)?;
        writeln!(w, "[[config]]")?;
        writeln!(w, "ej = {}", fmt_f64(cfg.ej))?;
        writeln!(w, "n_visible = {}", cfg.n_visible)?;
        let entries: Vec<String> = cfg
            .diagonals
            .iter()
            .map(|&(n, p)| format!("[{n}, {}]", fmt_f64(p)))
            .collect();
        writeln!(w, "diagonals = [{}]", entries.join(", "))?;
    }
    Ok(())
}

/// Structured text record of a reconstruction result: diagnostics and rho as
/// row-major [re, im] pairs.
pub fn write_result_record<W: Write>(w: &mut W, result: &ReconstructionResult) -> Result<()> {
    writeln!(w, "residual = {}", fmt_f64(result.residual))?;
    writeln!(w, "rank = {}", result.rank)?;
    writeln!(w, "parameters = {}", result.parameters)?;
    writeln!(w, "condition = {}", fmt_f64(result.condition))?;
    writeln!(w, "unconstrained = {}", result.unconstrained)?;
    writeln!(w, "iterations = {}", result.iterations)?;
    let per: Vec<String> = result
        .per_config_residuals
        .iter()
        .map(|r| fmt_f64(*r))
        .collect();
    writeln!(w, "per_config_residuals = [{}]", per.join(", "))?;
    let rho: Vec<String> = result
        .rho
        .data()
        .iter()
        .map(|z| format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im)))
        .collect();
    writeln!(w, "rho = [{}]", rho.join(", "))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for &x in &[
            0.1,
            -3.0,
            1.0 / 3.0,
            std::f64::consts::PI,
            1.2345678901234567e-12,
            6.02e23,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn header_and_rows() {
        let rows = vec![(50.0, 0i32, 0.357), (50.0, 1, 0.239)];
        let mut buf = Vec::new();
        write_probabilities(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "EJ_over_EC,n,p");
        assert!(lines.next().unwrap().starts_with("5.0000000000000000e1,0,"));
    }
}
