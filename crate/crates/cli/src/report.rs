//! Machine-readable command output.

use gmaxent_core::lattice::LinearConstraint;
use gmaxent_core::{ConvexRegion, MaxEntSolution, ModelSpace, SolveStatus, State};
use serde::{Deserialize, Serialize};

use crate::error::{exit, CliError};
use crate::schema::{Entry, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    BoundaryOnly,
    Infeasible,
    NonConvergence,
}

impl From<SolveStatus> for Status {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => Status::Converged,
            SolveStatus::BoundaryOnly => Status::BoundaryOnly,
            SolveStatus::Infeasible => Status::Infeasible,
            SolveStatus::NonConvergence => Status::NonConvergence,
        }
    }
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => exit::OK,
            Status::BoundaryOnly => exit::BOUNDARY_ONLY,
            Status::Infeasible => exit::INFEASIBLE,
            Status::NonConvergence => exit::NON_CONVERGENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub status: Status,
    /// `dual_newton` or `frank_wolfe`.
    pub solver: String,
    pub state: Tensor,
    pub multipliers: Vec<f64>,
    pub lambda0: Option<f64>,
    pub entropy: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SolutionReport {
    pub fn new(sol: &MaxEntSolution, wall_time_ms: f64, seed: Option<u64>) -> Result<Self, CliError> {
        Ok(Self {
            status: sol.status.into(),
            solver: if sol.lambda0.is_some() {
                "dual_newton"
            } else {
                "frank_wolfe"
            }
            .to_string(),
            state: state_tensor(&sol.state)?,
            multipliers: sol.multipliers.clone(),
            lambda0: sol.lambda0,
            entropy: sol.entropy,
            residuals: sol.residuals.clone(),
            iterations: sol.iterations,
            wall_time_ms,
            seed,
        })
    }
}

fn complex_matrix(m: &gmaxent_core::HermitianMatrix) -> Tensor {
    Tensor::Matrix(
        m.rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| Entry::Complex([z.re, z.im])).collect())
            .collect(),
    )
}

/// Density matrix for quantum states, ambient coordinates otherwise.
pub fn state_tensor(s: &State) -> Result<Tensor, CliError> {
    Ok(match s.model().hilbert_dim() {
        Some(_) => complex_matrix(&s.density_matrix()?),
        None => Tensor::Vector(s.coords().to_vec()),
    })
}

fn functional_tensor(model: &ModelSpace, f: &[f64]) -> Result<Tensor, CliError> {
    Ok(match model.hilbert_dim() {
        Some(_) => complex_matrix(&model.operator_of_coords(f)?),
        None => Tensor::Vector(f.to_vec()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub functional: Tensor,
    pub target: f64,
}

impl ConstraintReport {
    fn new(c: &LinearConstraint) -> Result<Self, CliError> {
        Ok(Self {
            functional: functional_tensor(c.model(), c.functional())?,
            target: c.target(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub constraints: Vec<ConstraintReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Tensor>>,
    /// Constraints dropped as duplicates while forming the region.
    pub duplicates: usize,
    /// Whether the equalities are inconsistent on their own.
    pub contradictory: bool,
}

impl RegionReport {
    pub fn new(region: &ConvexRegion, duplicates: usize) -> Result<Self, CliError> {
        Ok(Self {
            constraints: region
                .constraints()
                .iter()
                .map(ConstraintReport::new)
                .collect::<Result<_, _>>()?,
            generators: region
                .generators()
                .map(|g| g.iter().map(state_tensor).collect::<Result<_, _>>())
                .transpose()?,
            duplicates,
            contradictory: region.is_contradictory(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeqReport {
    pub leq: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleStatus {
    Found,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub status: OracleStatus,
    pub resolution: f64,
    pub entropy: Option<f64>,
    pub state: Option<Tensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// Solver run alongside the oracle; `delta` is solver minus oracle entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub solver_status: Status,
    pub solver_entropy: f64,
    pub delta: Option<f64>,
}
