//! Numerical tolerances shared by every module.
//!
//! All thresholds live in one record so callers can tighten or relax them
//! without touching the algorithms. `Tolerances::default()` carries the
//! values the library is tested against.

/// Tolerance and iteration-budget record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Elementwise Hermiticity tolerance on construction.
    pub hermitian: f64,
    /// Jacobi sweep budget before `NumericalFailure`.
    pub eig_max_sweeps: usize,
    /// Largest eigenvalue accepted by `matrix_exp` before `Overflow`.
    pub exp_overflow: f64,
    /// Eigenvalues below this are treated as exact zeros by `matrix_log`.
    pub log_zero: f64,
    /// Negative eigenvalues below `-log_negative` are rejected by `matrix_log`.
    pub log_negative: f64,
    /// Relative gap under which the divided difference switches to its midpoint form.
    pub divided_difference: f64,
    /// Unit-functional and cone-membership tolerance for states.
    pub membership: f64,
    /// Phase-I residual and purity tolerance.
    pub loose_membership: f64,
    /// Elementwise tolerance on POVM completeness.
    pub completeness: f64,
    /// Unit-functional tolerance for polytope vertices.
    pub vertex_unit: f64,
    /// Tolerance for state-axiom residuals.
    pub axiom: f64,
    /// Constraint satisfaction tolerance for region membership.
    pub region: f64,
    /// Normalized-vector comparison tolerance for duplicate functionals.
    pub duplicate_functional: f64,
    /// Pivot threshold for rank checks.
    pub pivot: f64,
    /// Vertex enumeration cap on `constraints + ambient_dim`.
    pub enumeration_cap: usize,
    /// Dual gradient stopping threshold (infinity norm).
    pub dual_gradient: f64,
    /// Multiplier magnitude beyond which the dual is declared divergent.
    pub multiplier_bound: f64,
    /// Smallest state eigenvalue (or probability) treated as interior.
    pub boundary_eigenvalue: f64,
    /// Newton iteration budget.
    pub dual_max_iter: usize,
    /// Ridge added to the dual Hessian before each Newton solve.
    pub hessian_ridge: f64,
    /// Frank-Wolfe duality-gap stopping threshold.
    pub fw_gap: f64,
    /// Frank-Wolfe iteration budget.
    pub fw_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            eig_max_sweeps: 100,
            exp_overflow: 700.0,
            log_zero: 1e-300,
            log_negative: 1e-10,
            divided_difference: 1e-9,
            membership: 1e-10,
            loose_membership: 1e-8,
            completeness: 1e-10,
            vertex_unit: 1e-12,
            axiom: 1e-9,
            region: 1e-8,
            duplicate_functional: 1e-10,
            pivot: 1e-10,
            enumeration_cap: 12,
            dual_gradient: 1e-10,
            multiplier_bound: 1e4,
            boundary_eigenvalue: 1e-9,
            dual_max_iter: 500,
            hessian_ridge: 1e-12,
            fw_gap: 1e-7,
            fw_max_iter: 5000,
        }
    }
}
