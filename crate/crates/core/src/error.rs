use thiserror::Error;

/// Errors produced by the numerical modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver failed: {0}")]
    EigenSolve(String),

    #[error("time grid step {dt:.6e} violates the Nyquist bound for frequency {omega:.6e} (need dt <= {max_dt:.6e})")]
    NyquistViolation { dt: f64, omega: f64, max_dt: f64 },

    #[error("harmonic design matrix ill-conditioned: condition number {condition:.3e} exceeds {limit:.3e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("eigenlevel crossing between configurations: level {level_from} maps to level {level_to}")]
    LevelCrossing { level_from: usize, level_to: usize },

    #[error("underdetermined system: {equations} equations for {parameters} parameters (rank {rank})")]
    Underdetermined {
        equations: usize,
        parameters: usize,
        rank: usize,
    },

    #[error("nonlinear solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("infeasible configuration plan: {required} configurations required, cap is {cap}")]
    InfeasiblePlan { required: usize, cap: usize },

    #[error("matrix is not positive definite (eigenvalue {eigenvalue:.6e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("density matrix has no positive spectral weight")]
    NoPositiveWeight,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate qubit doublet: gap {gap:.3e} below {threshold:.3e}, subspace ill-defined")]
    DegenerateDoublet { gap: f64, threshold: f64 },

    #[error("Hilbert dimension {dim} exceeds configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
