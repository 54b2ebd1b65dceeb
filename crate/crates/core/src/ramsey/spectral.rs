//! Probability extraction from sigma_x records.
//!
//! The readout tones omega_n = Delta_p + 2 g n are known exactly, so the
//! default estimator is harmonic least-squares regression of the record onto
//! {cos(omega_n t)} — no spectral leakage at desk-scale durations, unlike FFT
//! bin-picking. A Hann-windowed, zero-padded periodogram is still produced
//! for plotting.

use ndarray::{Array1, Array2};
use ndarray_linalg::LeastSquaresSvd;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::chargemodel::{ChargeBasis, ChargeWavefunction, TargetModel};
use crate::error::{CoreError, Result};
use crate::ramsey::{simulate_protocol, ProbeSpec, RamseyRecord, TimeGrid};

/// Condition-number limit for the harmonic design matrix.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Extracted spectral peaks: charge label -> (tone frequency, amplitude).
#[derive(Debug, Clone)]
pub struct SpectralPeaks {
    entries: Vec<(i32, f64, f64)>,
}

impl SpectralPeaks {
    pub fn entries(&self) -> &[(i32, f64, f64)] {
        &self.entries
    }

    pub fn amplitude(&self, n: i32) -> Option<f64> {
        self.entries
            .iter()
            .find(|&&(m, _, _)| m == n)
            .map(|&(_, _, a)| a)
    }

    pub fn frequency(&self, n: i32) -> Option<f64> {
        self.entries
            .iter()
            .find(|&&(m, _, _)| m == n)
            .map(|&(_, w, _)| w)
    }

    pub fn total_amplitude(&self) -> f64 {
        self.entries.iter().map(|&(_, _, a)| a).sum()
    }
}

/// Harmonic least-squares amplitudes at the known tones of `basis`.
///
/// Requires the record to resolve neighbouring tones: 1/T <= (2g/h)/10.
/// Amplitudes are clipped to [0, 1].
pub fn extract_probabilities(record: &RamseyRecord, basis: &ChargeBasis) -> Result<SpectralPeaks> {
    let times = &record.times;
    let nt = times.len();
    let duration = times[nt - 1] - times[0] + (times[1] - times[0]);
    // 2g/h in cycles per time unit (hbar = 1, h = 2 pi)
    let tone_spacing_cycles = 2.0 * record.probe.g.abs() / (2.0 * std::f64::consts::PI);
    if 1.0 / duration > tone_spacing_cycles / 10.0 {
        return Err(CoreError::InvalidParameter(format!(
            "record duration {duration:.3e} resolves 1/T = {:.3e}, need <= {:.3e} (tone spacing / 10)",
            1.0 / duration,
            tone_spacing_cycles / 10.0
        )));
    }

    let cols = basis.dim();
    let mut design = Array2::<f64>::zeros((nt, cols));
    for (j, n) in basis.charges().enumerate() {
        let w = record.probe.omega(n);
        for (i, &t) in times.iter().enumerate() {
            design[[i, j]] = (w * t).cos();
        }
    }
    let solved = design
        .least_squares(&record.sigma_x)
        .map_err(|e| CoreError::EigenSolve(format!("least squares failed: {e}")))?;
    let sv = &solved.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > CONDITION_LIMIT {
        return Err(CoreError::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }

    let entries = basis
        .charges()
        .enumerate()
        .map(|(j, n)| {
            let a = solved.solution[j].clamp(0.0, 1.0);
            (n, record.probe.omega(n), a)
        })
        .collect();
    Ok(SpectralPeaks { entries })
}

/// Hann-windowed amplitude periodogram, zero-padded by `pad_factor`.
/// Frequencies are in cycles per time unit; amplitudes are single-sided and
/// coherent-gain corrected so an isolated tone of amplitude A peaks near A.
#[derive(Debug, Clone)]
pub struct Periodogram {
    pub frequency: Array1<f64>,
    pub amplitude: Array1<f64>,
}

pub fn periodogram(record: &RamseyRecord, pad_factor: usize) -> Periodogram {
    let n = record.sigma_x.len();
    let padded = (n * pad_factor.max(1)).next_power_of_two();
    let mut window_sum = 0.0;
    let mut buf: Vec<Complex64> = Vec::with_capacity(padded);
    for i in 0..n {
        let w = 0.5
            * (1.0
                - (2.0 * std::f64::consts::PI * i as f64 / (n as f64 - 1.0))
                    .cos());
        window_sum += w;
        buf.push(Complex64::new(record.sigma_x[i] * w, 0.0));
    }
    buf.resize(padded, Complex64::new(0.0, 0.0));
    let fft = FftPlanner::new().plan_fft_forward(padded);
    fft.process(&mut buf);

    let dt = record.times[1] - record.times[0];
    let half = padded / 2;
    let mut frequency = Array1::zeros(half);
    let mut amplitude = Array1::zeros(half);
    for i in 0..half {
        frequency[i] = i as f64 / (padded as f64 * dt);
        // single-sided amplitude: 2/window_sum, except at DC
        let gain = if i == 0 { window_sum } else { window_sum / 2.0 };
        amplitude[i] = buf[i].norm() / gain;
    }
    Periodogram { frequency, amplitude }
}

/// One row of a residual-EJ study.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub ej_over_ec: f64,
    pub peaks: SpectralPeaks,
}

/// Peak table over residual readout Josephson energies (Fig. 6(b)-style).
#[derive(Debug, Clone)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn row(&self, ej_over_ec: f64) -> Option<&ScanRow> {
        self.rows
            .iter()
            .find(|r| (r.ej_over_ec - ej_over_ec).abs() < 1e-12)
    }
}

/// Simulate and extract peaks for each residual E_J/E_C value. Rows keep the
/// order of `ej_ratios`; points run in parallel and the output is independent
/// of the schedule.
pub fn residual_ej_scan(
    prepared: &ChargeWavefunction,
    ec: f64,
    ng: f64,
    probe: &ProbeSpec,
    ej_ratios: &[f64],
    grid: &TimeGrid,
    extraction_basis: &ChargeBasis,
) -> Result<ScanTable> {
    let rows = ej_ratios
        .par_iter()
        .map(|&ratio| {
            let readout = TargetModel::new(ec, ratio * ec, ng)?;
            let record = simulate_protocol(prepared, &readout, probe, grid)?;
            let peaks = extract_probabilities(&record, extraction_basis)?;
            Ok(ScanRow {
                ej_over_ec: ratio,
                peaks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { rows })
}
