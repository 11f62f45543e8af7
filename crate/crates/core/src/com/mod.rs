//! Convex operational models: state spaces, effects, observables.

mod axioms;
mod model;
mod observable;
pub mod random;
mod state;

pub use axioms::{check_state_axioms, AxiomReport};
pub(crate) use model::max_diff;
pub use model::{ModelKind, ModelSpace, PolytopeModel};
pub use observable::{evaluate, mean_value, validate_povm, Effect, Observable, Outcome, PovmReport, PovmViolation};
pub(crate) use state::{combine, mixing_weights};
pub use state::{is_pure, pure_state_from_vector, spectral_mixture, State};
