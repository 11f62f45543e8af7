//! Entropy maximization over the meet of constraint regions.
//!
//! * [`solve_dual`]: Shannon (classical) and von Neumann (quantum) entropy
//!   through the exponential-family dual. The maximizer has the form
//!   `ρ = exp(−λ₀·1 − Σ λᵢRᵢ)` with `λ₀ = ln Z(λ)` and
//!   `Z(λ) = tr exp(−Σ λᵢRᵢ)`, and the multipliers solve `rᵢ = −∂ ln Z/∂λᵢ`.
//!   Newton's method minimizes the convex dual `D(λ) = ln Z(λ) + Σ λᵢrᵢ`.
//! * [`solve_polytope`]: any concave objective with a gradient on a
//!   polyhedral model, by Frank-Wolfe over mixing weights.
//! * [`oracle_maxent`]: brute-force grid search for small instances.

mod dual;
mod entropy;
mod frank_wolfe;
mod oracle;

use std::fmt;
use std::sync::Arc;

pub use dual::{dual_gradient, dual_hessian, partition_function, solve_dual, solve_dual_observed, NewtonStep};
pub use entropy::{binary_entropy, entropy, shannon_entropy, von_neumann_entropy};
pub use frank_wolfe::solve_polytope;
pub use oracle::{oracle_maxent, OracleOutcome};

use crate::com::{ModelSpace, Observable, State};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lattice::ConvexRegion;

/// A concave function on a model's ambient coordinates, with its gradient.
pub trait ConcaveObjective: Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, coords: &[f64]) -> f64;
    fn gradient(&self, coords: &[f64]) -> Vec<f64>;
}

/// The function maximized over the constraint region.
#[derive(Clone)]
pub enum Objective {
    /// `−Σ pᵢ ln pᵢ` on classical models.
    Shannon,
    /// `−tr(ρ ln ρ)` on quantum models.
    VonNeumann,
    /// Sum over the listed measurements of the Shannon entropy of their
    /// outcome distributions.
    FiducialMeasurementEntropy(Vec<Observable>),
    Custom(Arc<dyn ConcaveObjective>),
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Shannon => write!(f, "Shannon"),
            Objective::VonNeumann => write!(f, "VonNeumann"),
            Objective::FiducialMeasurementEntropy(m) => {
                write!(f, "FiducialMeasurementEntropy({} measurements)", m.len())
            }
            Objective::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

impl Objective {
    fn check_model(&self, model: &ModelSpace) -> Result<()> {
        use crate::com::ModelKind::*;
        let ok = match self {
            Objective::Shannon => model.kind() == Classical,
            Objective::VonNeumann => model.kind() == Quantum,
            Objective::FiducialMeasurementEntropy(ms) => {
                model.is_polyhedral() && ms.iter().all(|m| **m.model() == *model)
            }
            Objective::Custom(_) => model.is_polyhedral(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleObjective(format!(
                "{self:?} on a {:?} model",
                model.kind()
            )))
        }
    }
}

/// Maximize `objective` over `region`.
#[derive(Debug, Clone)]
pub struct MaxEntProblem {
    pub region: ConvexRegion,
    pub objective: Objective,
    pub tolerances: Tolerances,
}

impl MaxEntProblem {
    pub fn new(region: ConvexRegion, objective: Objective) -> Result<Self> {
        objective.check_model(region.model())?;
        Ok(Self {
            region,
            objective,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn model(&self) -> &Arc<ModelSpace> {
        self.region.model()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    /// The supremum sits on the boundary of the state space and is not
    /// attained at finite multipliers; the state is the limit found.
    BoundaryOnly,
    Infeasible,
    NonConvergence,
}

#[derive(Debug, Clone)]
pub struct MaxEntSolution {
    pub state: State,
    /// One multiplier per constraint of the region, in order. Constraints
    /// dropped as redundant carry 0. Empty for the Frank-Wolfe path.
    pub multipliers: Vec<f64>,
    /// `ln Z` at the multipliers; `None` for the Frank-Wolfe path.
    pub lambda0: Option<f64>,
    /// Objective value at `state`, in nats.
    pub entropy: f64,
    pub iterations: usize,
    /// `|⟨Rᵢ⟩ − rᵢ|` per constraint.
    pub residuals: Vec<f64>,
    pub status: SolveStatus,
}

impl MaxEntSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }
}

/// Dispatches to the dual Newton solver for Shannon/von Neumann problems
/// given by equalities, and to Frank-Wolfe otherwise.
pub fn solve(problem: &MaxEntProblem) -> Result<MaxEntSolution> {
    let dual_capable = matches!(problem.objective, Objective::Shannon | Objective::VonNeumann)
        && problem.region.generators().is_none();
    if dual_capable {
        solve_dual(problem)
    } else {
        solve_polytope(problem)
    }
}

pub(crate) fn residuals(region: &ConvexRegion, s: &State) -> Vec<f64> {
    region.constraints().iter().map(|c| c.residual(s)).collect()
}
