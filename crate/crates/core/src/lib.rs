//! Maximum-entropy inference over convex operational models.
//!
//! Conditions on a statistical model (mean values of observables, or
//! probabilities of effects) are turned into convex regions of its state
//! space. The regions form a lattice (meet = intersection, join = convex
//! hull, order = inclusion) and the inferred state is the entropy maximizer
//! over the meet of all condition regions.
//!
//! * [`hermitian`]: Hermitian matrix numerics (eigendecomposition, `exp`,
//!   `log`, Fréchet derivative of `exp`).
//! * [`com`]: classical, quantum and polytope models with their states,
//!   effects and observables.
//! * [`lattice`]: constraint regions and the lattice operations.
//! * [`maxent`]: the dual Newton solver, the Frank-Wolfe solver and a
//!   brute-force grid oracle.

pub mod com;
pub mod config;
pub mod error;
pub mod hermitian;
pub mod lattice;
pub mod linalg;
pub mod lp;
pub mod maxent;

pub use com::{Effect, ModelKind, ModelSpace, Observable, Outcome, State};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use hermitian::HermitianMatrix;
pub use lattice::{ConvexRegion, Feasibility, LinearConstraint};
pub use maxent::{MaxEntProblem, MaxEntSolution, Objective, SolveStatus};
