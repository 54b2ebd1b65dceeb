//! Configuration planning, simulated measurements, and the constrained
//! least-squares solve.
//!
//! Hermiticity and unit trace are imposed by parametrization (real diagonal
//! with one entry eliminated by the trace, real/imaginary parts of the upper
//! triangle); positivity is restored afterwards by spectral clipping. The
//! `cholesky` mode instead parametrizes rho = L L^dag / tr(L L^dag) and
//! refines the projected linear solution with damped Gauss-Newton steps.

use ndarray::{Array1, Array2};
use ndarray_linalg::{LeastSquaresSvd, Solve};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::chargemodel::{self, ChargeBasis, TargetModel};
use crate::error::{CoreError, Result};
use crate::tomography::maps::{adiabatic_transform, measurement_map_numeric, MeasurementMap};
use crate::tomography::{diagonal_distance, hilbert_schmidt_distance, project_physical, DensityMatrix};

/// Default admission floor: measured diagonals below it are dropped from the
/// least-squares system.
pub const DEFAULT_VISIBILITY_FLOOR: f64 = 1e-4;

/// A planned probe configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedConfig {
    pub ej: f64,
    /// Power-law visibility estimate round((EJ/EC)^(1/4)), used for counting.
    pub n_visible_planned: u32,
}

/// Configuration plan for a reconstruction run.
#[derive(Debug, Clone)]
pub struct ConfigPlan {
    pub ej0: f64,
    pub ec: f64,
    pub n_rep: u32,
    pub configs: Vec<PlannedConfig>,
    /// Count estimate from dim(rho) / (2 min_i(2 N_i + 1)), with a 1.5x margin.
    pub required: usize,
}

fn planned_visibility(ej: f64, ec: f64) -> u32 {
    ((ej / ec).powf(0.25).round() as u32).max(1)
}

/// Plan `count` configurations uniform in E_J over [ej_min, ej_max]
/// (default: the computed requirement).
pub fn plan_configurations(
    model: &TargetModel,
    ej_min: f64,
    ej_max: f64,
    n_rep: u32,
    count: Option<usize>,
    cap: usize,
) -> Result<ConfigPlan> {
    if !(ej_min > 0.0) || ej_min > ej_max || ej_max > model.ej * (1.0 + 1e-12) {
        return Err(CoreError::InvalidParameter(format!(
            "EJ range ({ej_min}, {ej_max}) must satisfy 0 < min <= max <= EJ0 = {}",
            model.ej
        )));
    }
    let dim_rho = (2 * n_rep as usize + 1).pow(2);
    let min_vis = planned_visibility(ej_min, model.ec).min(planned_visibility(ej_max, model.ec));
    let per_config = 2 * (2 * min_vis as usize + 1);
    let base = dim_rho.div_ceil(per_config);
    let required = (base as f64 * 1.5).ceil() as usize;
    let count = count.unwrap_or(required);
    if count > cap {
        return Err(CoreError::InfeasiblePlan {
            required: count,
            cap,
        });
    }
    let configs = if count == 1 {
        vec![PlannedConfig {
            ej: ej_max,
            n_visible_planned: planned_visibility(ej_max, model.ec),
        }]
    } else {
        (0..count)
            .map(|i| {
                let ej = ej_min + (ej_max - ej_min) * i as f64 / (count - 1) as f64;
                PlannedConfig {
                    ej,
                    n_visible_planned: planned_visibility(ej, model.ec),
                }
            })
            .collect()
    };
    Ok(ConfigPlan {
        ej0: model.ej,
        ec: model.ec,
        n_rep,
        configs,
        required,
    })
}

/// Measured diagonals for one configuration.
#[derive(Debug, Clone)]
pub struct MeasuredConfig {
    pub ej: f64,
    /// Largest |n| admitted by the visibility floor.
    pub n_visible: u32,
    pub diagonals: Vec<(i32, f64)>,
}

/// The assembled inverse problem.
#[derive(Debug, Clone)]
pub struct ReconstructionProblem {
    /// Model family used to build the measurement maps (its `ej` is E_J^0).
    pub map_model: TargetModel,
    pub n_rep: u32,
    pub visibility_floor: f64,
    pub noise_std: Option<f64>,
    pub configs: Vec<MeasuredConfig>,
}

impl ReconstructionProblem {
    /// Swap the map family, e.g. to test a mismatched model against the same
    /// measurements.
    pub fn with_map_model(mut self, fit: TargetModel) -> Self {
        self.map_model = fit;
        self
    }

    pub fn equation_count(&self) -> usize {
        self.configs.iter().map(|c| c.diagonals.len()).sum()
    }
}

/// Simulate ground-state measurements over the planned configurations.
///
/// Adiabatic ground-state following means the measured diagonals at E_J^i are
/// those of the ground state at E_J^i directly: rho'_nn = |<n|GS(E_J^i)>|^2.
/// Every diagonal above the visibility floor is recorded (the floor, not the
/// planning power law, decides admission). Optional Gaussian noise is applied
/// per diagonal and clipped to [0, 1].
pub fn simulate_measurements(
    true_model: &TargetModel,
    plan: &ConfigPlan,
    visibility_floor: f64,
    noise: Option<(f64, u64)>,
) -> Result<ReconstructionProblem> {
    let reference = true_model.at_ej(plan.ej0)?;
    let internal = ChargeBasis::internal_for(&reference);
    let mut configs = Vec::with_capacity(plan.configs.len());
    for (ci, planned) in plan.configs.iter().enumerate() {
        let model_i = true_model.at_ej(planned.ej)?;
        let gs = chargemodel::solve_model(&model_i, &internal, 1)?;
        let mut rng = noise.map(|(std, seed)| {
            (
                std,
                ChaCha12Rng::seed_from_u64(
                    seed.wrapping_add((ci as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                ),
            )
        });
        let mut diagonals = Vec::new();
        let mut n_visible = 0u32;
        for n in internal.charges() {
            let mut p = gs.ground().coefficient(n).norm_sqr();
            if let Some((std, ref mut rng)) = rng {
                p = (p + std * gaussian(rng)).clamp(0.0, 1.0);
            }
            if p >= visibility_floor {
                diagonals.push((n, p));
                n_visible = n_visible.max(n.unsigned_abs());
            }
        }
        configs.push(MeasuredConfig {
            ej: planned.ej,
            n_visible,
            diagonals,
        });
    }
    Ok(ReconstructionProblem {
        map_model: reference,
        n_rep: plan.n_rep,
        visibility_floor,
        noise_std: noise.map(|(s, _)| s),
        configs,
    })
}

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Build numeric maps for every configuration of `problem` from its map
/// family; parallel over configurations.
pub fn build_numeric_maps(problem: &ReconstructionProblem) -> Result<Vec<MeasurementMap>> {
    let internal = ChargeBasis::internal_for(&problem.map_model);
    problem
        .configs
        .par_iter()
        .map(|cfg| {
            let t = adiabatic_transform(&problem.map_model, cfg.ej, &[], &internal)?;
            measurement_map_numeric(&t, problem.n_rep, internal.n_max())
        })
        .collect()
}

/// Least-squares solver mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Convex: real parametrization, trace eliminated, ordinary LS, then
    /// physicality projection.
    Linear,
    /// rho = L L^dag / tr(L L^dag), damped Gauss-Newton from the projected
    /// linear solution.
    Cholesky,
}

/// Reconstruction output with solver diagnostics.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    /// Pre-projection Hermitian estimate.
    pub rho_raw: Array2<Complex64>,
    /// Least-squares objective (sum of squared equation residuals).
    pub residual: f64,
    pub per_config_residuals: Vec<f64>,
    pub rank: usize,
    pub parameters: usize,
    pub condition: f64,
    /// Parameters beyond the numerical rank (null-space directions the data
    /// does not constrain; the minimum-norm solution sets them to zero).
    pub unconstrained: usize,
    pub iterations: usize,
}

struct LinearSystem {
    a: Array2<f64>,
    b: Array1<f64>,
    row_config: Vec<usize>,
}

struct Parametrization {
    dim: usize,
    elim: usize,
    pairs: Vec<(usize, usize)>,
}

impl Parametrization {
    fn new(n_rep: u32) -> Self {
        let dim = 2 * n_rep as usize + 1;
        let elim = n_rep as usize; // the n = 0 diagonal carries the trace
        let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);
        for j in 0..dim {
            for k in (j + 1)..dim {
                pairs.push((j, k));
            }
        }
        Self { dim, elim, pairs }
    }

    fn len(&self) -> usize {
        (self.dim - 1) + 2 * self.pairs.len()
    }

    fn diag_col(&self, j: usize) -> Option<usize> {
        match j.cmp(&self.elim) {
            std::cmp::Ordering::Less => Some(j),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(j - 1),
        }
    }

    fn pair_col(&self, pair_index: usize) -> usize {
        (self.dim - 1) + 2 * pair_index
    }

    fn to_matrix(&self, x: &Array1<f64>) -> Array2<Complex64> {
        let mut rho = Array2::<Complex64>::zeros((self.dim, self.dim));
        let mut trace_rest = 0.0;
        for j in 0..self.dim {
            if let Some(col) = self.diag_col(j) {
                rho[[j, j]] = Complex64::new(x[col], 0.0);
                trace_rest += x[col];
            }
        }
        rho[[self.elim, self.elim]] = Complex64::new(1.0 - trace_rest, 0.0);
        for (pi, &(j, k)) in self.pairs.iter().enumerate() {
            let col = self.pair_col(pi);
            let v = Complex64::new(x[col], x[col + 1]);
            rho[[j, k]] = v;
            rho[[k, j]] = v.conj();
        }
        rho
    }
}

fn assemble_linear(
    problem: &ReconstructionProblem,
    maps: &[MeasurementMap],
    par: &Parametrization,
) -> Result<LinearSystem> {
    if maps.len() != problem.configs.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "{} maps for {} configurations",
            maps.len(),
            problem.configs.len()
        )));
    }
    let rows = problem.equation_count();
    let mut a = Array2::<f64>::zeros((rows, par.len()));
    let mut b = Array1::<f64>::zeros(rows);
    let mut row_config = Vec::with_capacity(rows);
    let mut row = 0usize;
    for (ci, (cfg, map)) in problem.configs.iter().zip(maps.iter()).enumerate() {
        if (map.ej_config - cfg.ej).abs() > 1e-9 * cfg.ej.abs().max(1.0) {
            return Err(CoreError::ShapeMismatch(format!(
                "map at EJ={} paired with configuration at EJ={}",
                map.ej_config, cfg.ej
            )));
        }
        if map.rep_basis().dim() != par.dim {
            return Err(CoreError::ShapeMismatch(
                "map representation window does not match the problem".into(),
            ));
        }
        for &(n, value) in &cfg.diagonals {
            if !map.meas_basis().contains(n) {
                return Err(CoreError::ShapeMismatch(format!(
                    "measured diagonal n={n} outside the map window (|n| <= {})",
                    map.meas_basis().n_max()
                )));
            }
            let slice = map.slice(n);
            let m_elim = slice[[par.elim, par.elim]].re;
            for j in 0..par.dim {
                if let Some(col) = par.diag_col(j) {
                    a[[row, col]] = slice[[j, j]].re - m_elim;
                }
            }
            for (pi, &(j, k)) in par.pairs.iter().enumerate() {
                let m = slice[[k, j]];
                let col = par.pair_col(pi);
                a[[row, col]] = 2.0 * m.re;
                a[[row, col + 1]] = -2.0 * m.im;
            }
            b[row] = value - m_elim;
            row_config.push(ci);
            row += 1;
        }
    }
    Ok(LinearSystem { a, b, row_config })
}

fn per_config_residuals(
    sys: &LinearSystem,
    x: &Array1<f64>,
    n_configs: usize,
) -> (f64, Vec<f64>) {
    let predicted = sys.a.dot(x);
    let mut total = 0.0;
    let mut per = vec![0.0; n_configs];
    for (i, ci) in sys.row_config.iter().enumerate() {
        let r = predicted[i] - sys.b[i];
        total += r * r;
        per[*ci] += r * r;
    }
    (total, per)
}

/// Solve the reconstruction problem.
///
/// `allow_underdetermined` permits fewer equations than parameters: the
/// minimum-norm solution is returned and the rank deficit is reported in the
/// diagnostics instead of failing. The default contract (false) rejects such
/// systems.
pub fn solve_reconstruction(
    problem: &ReconstructionProblem,
    maps: &[MeasurementMap],
    mode: SolverMode,
    allow_underdetermined: bool,
) -> Result<ReconstructionResult> {
    let par = Parametrization::new(problem.n_rep);
    let sys = assemble_linear(problem, maps, &par)?;
    let rows = sys.a.nrows();
    if rows < par.len() && !allow_underdetermined {
        return Err(CoreError::Underdetermined {
            equations: rows,
            parameters: par.len(),
            rank: rows,
        });
    }
    let ls = sys
        .a
        .least_squares(&sys.b)
        .map_err(|e| CoreError::EigenSolve(format!("least squares failed: {e}")))?;
    let rank = ls.rank.max(0) as usize;
    let sv = &ls.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin_kept = if rank > 0 && rank <= sv.len() {
        sv[rank - 1]
    } else {
        0.0
    };
    let condition = if smin_kept > 0.0 {
        smax / smin_kept
    } else {
        f64::INFINITY
    };
    let x = ls.solution;
    let rho_raw = par.to_matrix(&x);
    let basis = ChargeBasis::new(problem.n_rep);
    let (residual, per_config) = per_config_residuals(&sys, &x, problem.configs.len());
    let rho = project_physical(&rho_raw, &basis)?;

    let linear = ReconstructionResult {
        rho,
        rho_raw,
        residual,
        per_config_residuals: per_config,
        rank,
        parameters: par.len(),
        condition,
        unconstrained: par.len().saturating_sub(rank),
        iterations: 0,
    };
    match mode {
        SolverMode::Linear => Ok(linear),
        SolverMode::Cholesky => refine_cholesky(problem, maps, &par, &sys, linear),
    }
}

struct CholeskyParams {
    dim: usize,
}

impl CholeskyParams {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn unpack(&self, x: &Array1<f64>) -> Array2<Complex64> {
        let mut l = Array2::<Complex64>::zeros((self.dim, self.dim));
        let mut idx = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                if i == j {
                    l[[i, j]] = Complex64::new(x[idx], 0.0);
                    idx += 1;
                } else {
                    l[[i, j]] = Complex64::new(x[idx], x[idx + 1]);
                    idx += 2;
                }
            }
        }
        l
    }

    fn pack(&self, l: &Array2<Complex64>) -> Array1<f64> {
        let mut x = Array1::zeros(self.len());
        let mut idx = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                if i == j {
                    x[idx] = l[[i, j]].re;
                    idx += 1;
                } else {
                    x[idx] = l[[i, j]].re;
                    x[idx + 1] = l[[i, j]].im;
                    idx += 2;
                }
            }
        }
        x
    }

    fn density(&self, x: &Array1<f64>) -> Array2<Complex64> {
        let l = self.unpack(x);
        let mut rho = Array2::<Complex64>::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..=i.min(j) {
                    acc += l[[i, m]] * l[[j, m]].conj();
                }
                rho[[i, j]] = acc;
            }
        }
        let trace: f64 = (0..self.dim).map(|i| rho[[i, i]].re).sum();
        rho.mapv_inplace(|z| z / trace.max(1e-300));
        rho
    }
}

fn lower_cholesky(rho: &Array2<Complex64>, ridge: f64) -> Array2<Complex64> {
    let dim = rho.nrows();
    let mut l = Array2::<Complex64>::zeros((dim, dim));
    for j in 0..dim {
        let mut s = rho[[j, j]].re;
        for m in 0..j {
            s -= l[[j, m]].norm_sqr();
        }
        let d = s.max(ridge).sqrt();
        l[[j, j]] = Complex64::new(d, 0.0);
        for i in (j + 1)..dim {
            let mut acc = rho[[i, j]];
            for m in 0..j {
                acc -= l[[i, m]] * l[[j, m]].conj();
            }
            l[[i, j]] = acc / d;
        }
    }
    l
}

fn equation_residuals(
    problem: &ReconstructionProblem,
    maps: &[MeasurementMap],
    rho: &Array2<Complex64>,
) -> Result<Array1<f64>> {
    let rows = problem.equation_count();
    let mut r = Array1::zeros(rows);
    let mut row = 0;
    for (cfg, map) in problem.configs.iter().zip(maps.iter()) {
        for &(n, value) in &cfg.diagonals {
            r[row] = map.predict(rho, n)? - value;
            row += 1;
        }
    }
    Ok(r)
}

fn refine_cholesky(
    problem: &ReconstructionProblem,
    maps: &[MeasurementMap],
    par: &Parametrization,
    sys: &LinearSystem,
    linear: ReconstructionResult,
) -> Result<ReconstructionResult> {
    let dim = par.dim;
    let cp = CholeskyParams { dim };
    let ridge = 1e-12;
    let mut x = cp.pack(&lower_cholesky(linear.rho.data(), ridge));
    let mut r = equation_residuals(problem, maps, &cp.density(&x))?;
    let mut objective: f64 = r.iter().map(|v| v * v).sum();
    let rows = r.len();
    let np = cp.len();
    let mut lambda = 1e-3;
    let max_iterations = 200;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        // forward-difference Jacobian
        let mut jac = Array2::<f64>::zeros((rows, np));
        for k in 0..np {
            let h = 1e-7 * x[k].abs().max(1e-3);
            let mut xp = x.clone();
            xp[k] += h;
            let rp = equation_residuals(problem, maps, &cp.density(&xp))?;
            for i in 0..rows {
                jac[[i, k]] = (rp[i] - r[i]) / h;
            }
        }
        let jtj = jac.t().dot(&jac);
        let jtr = jac.t().dot(&r);
        let grad_inf = jtr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if grad_inf < 1e-13 {
            converged = true;
            break;
        }

        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for k in 0..np {
                lhs[[k, k]] += lambda * jtj[[k, k]].max(1e-12);
            }
            let delta = lhs
                .solve(&jtr)
                .map_err(|e| CoreError::EigenSolve(format!("LM step failed: {e}")))?;
            let mut xt = x.clone();
            for k in 0..np {
                xt[k] -= delta[k];
            }
            let rt = equation_residuals(problem, maps, &cp.density(&xt))?;
            let ft: f64 = rt.iter().map(|v| v * v).sum();
            if ft < objective {
                let gain = objective - ft;
                x = xt;
                r = rt;
                objective = ft;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if gain < 1e-16 + 1e-12 * objective {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if converged {
            break;
        }
        if !improved {
            // damping exhausted: the iterate is stationary to machine noise
            converged = true;
            break;
        }
    }

    if !converged || !objective.is_finite() {
        return Err(CoreError::NonConvergence {
            iterations,
            residual: objective,
        });
    }

    let rho_raw = cp.density(&x);
    let basis = ChargeBasis::new(problem.n_rep);
    let rho = project_physical(&rho_raw, &basis)?;
    // per-config split of the nonlinear residual, reusing the row layout
    let mut per = vec![0.0; problem.configs.len()];
    for (i, ci) in sys.row_config.iter().enumerate() {
        per[*ci] += r[i] * r[i];
    }
    Ok(ReconstructionResult {
        rho,
        rho_raw,
        residual: objective,
        per_config_residuals: per,
        rank: linear.rank,
        parameters: linear.parameters,
        condition: linear.condition,
        unconstrained: linear.unconstrained,
        iterations,
    })
}

/// One row of a model-validation study.
#[derive(Debug, Clone)]
pub struct ValidationRow {
    pub count: usize,
    pub hs_distance: f64,
    pub diag_distance: f64,
    pub residual: f64,
    pub rank: usize,
    pub parameters: usize,
}

/// Reconstruct measurements generated by `true_model` using maps from
/// `fit_model`, over a list of configuration counts, and report the distances
/// between the reconstruction and the fit model's expected ground state.
pub fn validate_model(
    true_model: &TargetModel,
    fit_model: &TargetModel,
    counts: &[usize],
    ej_min: f64,
    ej_max: f64,
    n_rep: u32,
    visibility_floor: f64,
    mode: SolverMode,
) -> Result<Vec<ValidationRow>> {
    if (true_model.ec - fit_model.ec).abs() > 1e-12 * true_model.ec {
        return Err(CoreError::InvalidParameter(
            "true and fit models must share EC".into(),
        ));
    }
    let rep = ChargeBasis::new(n_rep);
    let fit_gs = chargemodel::solve_model(fit_model, &ChargeBasis::internal_for(fit_model), 1)?
        .states
        .remove(0);
    let rho_sim = DensityMatrix::from_pure(&fit_gs.rebased(rep, 1e-3)?);

    counts
        .par_iter()
        .map(|&count| {
            let plan =
                plan_configurations(true_model, ej_min, ej_max, n_rep, Some(count), usize::MAX)?;
            let problem = simulate_measurements(true_model, &plan, visibility_floor, None)?
                .with_map_model(*fit_model);
            let maps = build_numeric_maps(&problem)?;
            let result = solve_reconstruction(&problem, &maps, mode, true)?;
            Ok(ValidationRow {
                count,
                hs_distance: hilbert_schmidt_distance(result.rho.data(), rho_sim.data())?,
                diag_distance: diagonal_distance(result.rho.data(), rho_sim.data())?,
                residual: result.residual,
                rank: result.rank,
                parameters: result.parameters,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn transmon50() -> TargetModel {
        TargetModel::new(1.0, 50.0, 0.0).unwrap()
    }

    #[test]
    fn plan_matches_worked_numbers() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(21), 1000).unwrap();
        assert_eq!(plan.configs.len(), 21);
        assert_abs_diff_eq!(plan.configs[0].ej, 10.0, epsilon = 0.0);
        assert_abs_diff_eq!(plan.configs[20].ej, 50.0, epsilon = 0.0);
        assert_abs_diff_eq!(plan.configs[1].ej - plan.configs[0].ej, 2.0, epsilon = 1e-12);
        // visibility ~2 at EJ/EC = 10, ~3 at 50; requirement near the paper's ~25
        assert_eq!(plan.configs[0].n_visible_planned, 2);
        assert_eq!(plan.configs[20].n_visible_planned, 3);
        assert!(plan.required >= 15 && plan.required <= 30, "{}", plan.required);
    }

    #[test]
    fn plan_collapses_at_equal_ej() {
        let model = transmon50();
        let plan = plan_configurations(&model, 50.0, 50.0, 5, None, 1000).unwrap();
        let dim = 11usize;
        // count heads toward dim(rho)/(2 N0 + 1) = 11 as visibility saturates
        assert!(plan.required <= 2 * dim, "{}", plan.required);
    }

    #[test]
    fn plan_rejects_over_cap() {
        let model = transmon50();
        match plan_configurations(&model, 10.0, 50.0, 5, Some(500), 100) {
            Err(CoreError::InfeasiblePlan { required, cap }) => {
                assert_eq!(required, 500);
                assert_eq!(cap, 100);
            }
            other => panic!("expected plan error, got {other:?}"),
        }
    }

    #[test]
    fn measurements_floor_admission() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(3), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        for cfg in &problem.configs {
            let sum: f64 = cfg.diagonals.iter().map(|&(_, p)| p).sum();
            assert!(sum <= 1.0 + 1e-9);
            for &(_, p) in &cfg.diagonals {
                assert!((1e-4..=1.0).contains(&p));
            }
        }
        // EJ/EC = 10: the Gaussian profile keeps |n| <= 3 above 1e-4
        assert_eq!(problem.configs[0].n_visible, 3);
        // EJ/EC = 50: |n| <= 4
        assert_eq!(problem.configs[2].n_visible, 4);
    }

    #[test]
    fn seeded_noise_reproducible() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(3), 100).unwrap();
        let a = simulate_measurements(&model, &plan, 1e-4, Some((1e-3, 7))).unwrap();
        let b = simulate_measurements(&model, &plan, 1e-4, Some((1e-3, 7))).unwrap();
        let c = simulate_measurements(&model, &plan, 1e-4, Some((1e-3, 8))).unwrap();
        for (ca, cb) in a.configs.iter().zip(b.configs.iter()) {
            assert_eq!(ca.diagonals, cb.diagonals);
        }
        assert!(a
            .configs
            .iter()
            .zip(c.configs.iter())
            .any(|(x, y)| x.diagonals != y.diagonals));
    }

    #[test]
    fn noiseless_reconstruction_hits_truth() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(21), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        assert!(problem.equation_count() >= 120, "{}", problem.equation_count());
        let maps = build_numeric_maps(&problem).unwrap();
        let result = solve_reconstruction(&problem, &maps, SolverMode::Linear, false).unwrap();
        let gs = chargemodel::ground_state(&model).unwrap();
        let rho_true = DensityMatrix::from_pure(&gs).truncated_raw(&ChargeBasis::new(5));
        let mut worst = 0.0f64;
        for (a, b) in result.rho.data().iter().zip(rho_true.iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst <= 1e-4, "max elementwise error {worst}");
        assert!(result.rho.min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn underdetermined_rejected_by_default() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(2), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        let maps = build_numeric_maps(&problem).unwrap();
        match solve_reconstruction(&problem, &maps, SolverMode::Linear, false) {
            Err(CoreError::Underdetermined { equations, parameters, .. }) => {
                assert!(equations < parameters);
            }
            other => panic!("expected underdetermined error, got {other:?}"),
        }
    }

    #[test]
    fn single_identity_config_recovers_diagonals_only() {
        let model = transmon50();
        let plan = plan_configurations(&model, 50.0, 50.0, 5, Some(1), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        let maps = build_numeric_maps(&problem).unwrap();
        let result = solve_reconstruction(&problem, &maps, SolverMode::Linear, true).unwrap();
        assert!(result.unconstrained > 0);
        let gs = chargemodel::ground_state(&model).unwrap();
        for &(n, p) in &problem.configs[0].diagonals {
            let raw = result.rho_raw[[
                ChargeBasis::new(5).index_of(n),
                ChargeBasis::new(5).index_of(n),
            ]];
            assert!((raw.re - p).abs() < 1e-10, "n={n}");
        }
        // unconstrained off-diagonals come back as zero in the raw solution
        let rep = ChargeBasis::new(5);
        let mut max_off = 0.0f64;
        for j in rep.charges() {
            for k in rep.charges() {
                if j != k {
                    max_off = max_off.max(
                        result.rho_raw[[rep.index_of(j), rep.index_of(k)]].norm(),
                    );
                }
            }
        }
        assert!(max_off < 1e-10, "{max_off}");
        let _ = gs;
    }

    #[test]
    fn cholesky_mode_agrees_with_linear() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(21), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        let maps = build_numeric_maps(&problem).unwrap();
        let lin = solve_reconstruction(&problem, &maps, SolverMode::Linear, false).unwrap();
        let chol = solve_reconstruction(&problem, &maps, SolverMode::Cholesky, false).unwrap();
        let hs = hilbert_schmidt_distance(lin.rho.data(), chol.rho.data()).unwrap();
        assert!(hs <= 1e-6, "solver cross-check HS distance {hs}");
        assert!(chol.iterations >= 1);
    }

    #[test]
    fn solver_idempotent_on_its_own_predictions() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(21), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        let maps = build_numeric_maps(&problem).unwrap();
        let first = solve_reconstruction(&problem, &maps, SolverMode::Linear, false).unwrap();

        let mut replay = problem.clone();
        for (cfg, map) in replay.configs.iter_mut().zip(maps.iter()) {
            for entry in cfg.diagonals.iter_mut() {
                entry.1 = map.predict(first.rho.data(), entry.0).unwrap();
            }
        }
        let second = solve_reconstruction(&replay, &maps, SolverMode::Linear, false).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in second.rho.data().iter().zip(first.rho.data().iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst <= 1e-10, "idempotence violated: {worst}");
    }

    #[test]
    fn phase_insensitive_for_ground_state_problems() {
        let model = transmon50();
        let plan = plan_configurations(&model, 10.0, 50.0, 5, Some(21), 100).unwrap();
        let problem = simulate_measurements(&model, &plan, 1e-4, None).unwrap();
        let internal = ChargeBasis::internal_for(&model);

        let plain = build_numeric_maps(&problem).unwrap();
        let twisted: Vec<MeasurementMap> = problem
            .configs
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let phases: Vec<f64> = (0..internal.dim())
                    .map(|q| (0.37 * (q as f64 + 1.0) * (i as f64 + 1.0)).sin() * 2.0)
                    .collect();
                let t = adiabatic_transform(&model, cfg.ej, &phases, &internal).unwrap();
                measurement_map_numeric(&t, problem.n_rep, internal.n_max()).unwrap()
            })
            .collect();

        let a = solve_reconstruction(&problem, &plain, SolverMode::Linear, false).unwrap();
        let b = solve_reconstruction(&problem, &twisted, SolverMode::Linear, false).unwrap();
        let mut worst = 0.0f64;
        for (x, y) in a.rho.data().iter().zip(b.rho.data().iter()) {
            worst = worst.max((x - y).norm());
        }
        assert!(worst <= 1e-10, "phase sensitivity {worst}");
    }
}
