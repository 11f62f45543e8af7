//! Turns a parsed [`ProblemFile`] into core objects.

use std::sync::Arc;

use gmaxent_core::com::validate_povm;
use gmaxent_core::lattice::{meet_counted, region_from_effect, region_from_mean};
use gmaxent_core::{
    ConvexRegion, Effect, HermitianMatrix, MaxEntProblem, ModelSpace, Objective, Observable, Outcome, State, Tolerances,
};
use num_complex::Complex64;

use crate::error::CliError;
use crate::schema::{ConditionKind, ConditionSpec, EffectSpec, ModelSpec, ObservableSpec, ProblemFile, Tensor};

pub const DEFAULT_RESOLUTION: f64 = 1e-3;

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Invalid(msg.into()))
}

pub fn build_model(spec: &ModelSpec) -> Result<Arc<ModelSpace>, CliError> {
    Ok(match spec {
        ModelSpec::Classical { dimension } => ModelSpace::classical(*dimension)?,
        ModelSpec::Quantum { dimension } => ModelSpace::quantum(*dimension)?,
        ModelSpec::SquareBit => ModelSpace::square_bit(),
        ModelSpec::Polytope { vertices, unit, points } => match (vertices, unit, points) {
            (Some(v), Some(u), None) => ModelSpace::polytope(v.clone(), u.clone())?,
            (None, None, Some(p)) => ModelSpace::polytope_affine(p)?,
            _ => return invalid("a polytope needs either `vertices` with `unit`, or `points`"),
        },
    })
}

pub fn matrix(t: &Tensor) -> Result<HermitianMatrix, CliError> {
    let Tensor::Matrix(rows) = t else {
        return invalid("expected a matrix (array of rows)");
    };
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| {
                    let (re, im) = e.parts();
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    Ok(HermitianMatrix::from_rows(&rows)?)
}

/// Ambient coordinates of a functional: a matrix on quantum models, a
/// vector elsewhere.
pub fn functional(model: &ModelSpace, t: &Tensor) -> Result<Vec<f64>, CliError> {
    match (model.hilbert_dim(), t) {
        (Some(d), Tensor::Matrix(_)) => {
            let m = matrix(t)?;
            if m.dim() != d {
                return invalid(format!("matrix is {0}x{0}, model needs {d}x{d}", m.dim()));
            }
            Ok(model.coords_of_operator(&m)?)
        }
        (Some(_), Tensor::Vector(_)) => invalid("quantum effects are matrices"),
        (None, Tensor::Vector(v)) if v.len() == model.ambient_dim() => Ok(v.clone()),
        (None, Tensor::Vector(v)) => invalid(format!(
            "vector has {} entries, model needs {}",
            v.len(),
            model.ambient_dim()
        )),
        (None, Tensor::Matrix(_)) => invalid("only quantum models take matrices"),
    }
}

/// A state given by ambient coordinates, a density matrix, or (for models
/// whose unit is the first coordinate) an affine point.
pub fn build_state(model: &Arc<ModelSpace>, t: &Tensor) -> Result<State, CliError> {
    let unit = model.unit_functional();
    let affine_unit = unit[0] == 1.0 && unit[1..].iter().all(|&x| x == 0.0);
    let coords = match t {
        Tensor::Vector(v) if model.hilbert_dim().is_none() && affine_unit && v.len() + 1 == model.ambient_dim() => {
            std::iter::once(1.0).chain(v.iter().copied()).collect()
        }
        _ => functional(model, t)?,
    };
    Ok(State::new(model.clone(), coords)?)
}

/// Builds the observable without checking that it is a POVM.
pub fn build_observable(model: &Arc<ModelSpace>, spec: &ObservableSpec) -> Result<Observable, CliError> {
    match (&spec.operator, spec.outcomes.is_empty()) {
        (Some(_), false) => invalid(format!(
            "observable {}: give `operator` or `outcomes`, not both",
            spec.name
        )),
        (None, true) => invalid(format!("observable {} has no outcomes", spec.name)),
        (Some(op), true) => match (model.as_ref(), op) {
            (ModelSpace::Quantum { .. }, _) => Ok(Observable::spectral(model.clone(), &matrix(op)?)?),
            (ModelSpace::Classical { dim }, Tensor::Vector(values)) if values.len() == *dim => {
                let outcomes = (0..*dim)
                    .map(|i| {
                        let mut e = vec![0.0; *dim];
                        e[i] = 1.0;
                        (i.to_string(), e, Some(values[i]))
                    })
                    .collect();
                Ok(Observable::from_functionals(model.clone(), outcomes)?)
            }
            _ => invalid(format!(
                "observable {}: `operator` is a matrix on quantum models or a value vector on classical ones",
                spec.name
            )),
        },
        (None, false) => {
            let mut outcomes = Vec::with_capacity(spec.outcomes.len());
            for o in &spec.outcomes {
                outcomes.push(Outcome {
                    label: o.label.clone(),
                    effect: Effect::unchecked(model.clone(), functional(model, &o.effect)?)?,
                    value: o.value,
                });
            }
            Ok(Observable::unchecked(model.clone(), outcomes))
        }
    }
}

pub fn build_effect(model: &Arc<ModelSpace>, spec: &EffectSpec) -> Result<Effect, CliError> {
    Ok(Effect::new(model.clone(), functional(model, &spec.effect)?)?)
}

/// The model, named objects and region declared by a file.
#[derive(Debug, Clone)]
pub struct Declared {
    pub model: Arc<ModelSpace>,
    pub observables: Vec<(String, Observable)>,
    pub effects: Vec<(String, Effect)>,
    pub region: ConvexRegion,
    /// Conditions dropped because an equivalent one was already present.
    pub duplicates: usize,
}

impl Declared {
    fn observable(&self, name: &str) -> Option<&Observable> {
        self.observables.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }
}

/// A fully assembled MaxEnt problem.
#[derive(Debug, Clone)]
pub struct Built {
    pub declared: Declared,
    pub objective: Objective,
    pub tolerances: Tolerances,
    pub resolution: f64,
    pub seed: Option<u64>,
}

impl Built {
    pub fn problem(&self) -> Result<MaxEntProblem, CliError> {
        Ok(MaxEntProblem::new(self.declared.region.clone(), self.objective.clone())?.with_tolerances(self.tolerances))
    }
}

pub fn condition_region(
    observables: &[(String, Observable)],
    effects: &[(String, Effect)],
    c: &ConditionSpec,
) -> Result<ConvexRegion, CliError> {
    let observable = observables.iter().find(|(n, _)| *n == c.name).map(|(_, o)| o);
    let effect = effects.iter().find(|(n, _)| *n == c.name).map(|(_, e)| e);
    match (c.kind, &c.outcome) {
        (ConditionKind::Mean, None) => match observable {
            Some(obs) => Ok(region_from_mean(obs, c.target)?),
            None => invalid(format!("mean condition names unknown observable {}", c.name)),
        },
        (ConditionKind::Mean, Some(_)) => invalid("a mean condition takes no `outcome`"),
        (ConditionKind::Probability, Some(label)) => {
            let Some(obs) = observable else {
                return invalid(format!("condition names unknown observable {}", c.name));
            };
            match obs.outcome(label) {
                Some(o) => Ok(region_from_effect(&o.effect, c.target)?),
                None => invalid(format!("observable {} has no outcome {label}", c.name)),
            }
        }
        (ConditionKind::Probability, None) => match effect {
            Some(e) => Ok(region_from_effect(e, c.target)?),
            None => invalid(format!("probability condition names unknown effect {}", c.name)),
        },
    }
}

/// Builds and validates every declared object, then meets all condition
/// regions (and the generator hull, if any).
pub fn declare(file: &ProblemFile) -> Result<Declared, CliError> {
    let model = build_model(&file.model)?;
    let mut observables = Vec::new();
    for spec in &file.observables {
        if observables.iter().any(|(n, _)| n == &spec.name) {
            return invalid(format!("observable {} declared twice", spec.name));
        }
        let obs = build_observable(&model, spec)?;
        let report = validate_povm(&obs);
        if !report.is_valid() {
            return invalid(format!("observable {}: {report}", spec.name));
        }
        observables.push((spec.name.clone(), obs));
    }
    let mut effects = Vec::new();
    for spec in &file.effects {
        if effects.iter().any(|(n, _)| n == &spec.name) {
            return invalid(format!("effect {} declared twice", spec.name));
        }
        effects.push((spec.name.clone(), build_effect(&model, spec)?));
    }

    let mut region = ConvexRegion::whole(model.clone());
    let mut duplicates = 0;
    for c in &file.conditions {
        let (next, dups) = meet_counted(&region, &condition_region(&observables, &effects, c)?)?;
        region = next;
        duplicates += dups;
    }
    if let Some(gens) = &file.generators {
        let states = gens
            .iter()
            .map(|g| build_state(&model, g))
            .collect::<Result<Vec<_>, _>>()?;
        region = meet_counted(&region, &ConvexRegion::from_generators(model.clone(), states)?)?.0;
    }
    Ok(Declared {
        model,
        observables,
        effects,
        region,
        duplicates,
    })
}

pub fn build(file: &ProblemFile) -> Result<Built, CliError> {
    let declared = declare(file)?;
    let solver = file.solver.clone().unwrap_or_default();
    let mut tolerances = Tolerances::default();
    if let Some(t) = solver.tolerance {
        tolerances.dual_gradient = t;
    }
    if let Some(n) = solver.max_iter {
        tolerances.dual_max_iter = n;
    }
    if let Some(g) = solver.fw_gap {
        tolerances.fw_gap = g;
    }
    if let Some(n) = solver.fw_max_iter {
        tolerances.fw_max_iter = n;
    }
    let objective = objective(&declared, file)?;
    Ok(Built {
        declared,
        objective,
        tolerances,
        resolution: solver.resolution.unwrap_or(DEFAULT_RESOLUTION),
        seed: solver.seed,
    })
}

fn objective(declared: &Declared, file: &ProblemFile) -> Result<Objective, CliError> {
    use gmaxent_core::ModelKind;
    let name = match &file.objective {
        Some(o) => o.name.as_str(),
        None => match declared.model.kind() {
            ModelKind::Classical => "shannon",
            ModelKind::Quantum => "von_neumann",
            ModelKind::Polytope => "fiducial",
        },
    };
    match name {
        "shannon" => Ok(Objective::Shannon),
        "von_neumann" => Ok(Objective::VonNeumann),
        "fiducial" => {
            let wanted = file
                .objective
                .as_ref()
                .map(|o| o.measurements.clone())
                .unwrap_or_default();
            let measurements: Vec<Observable> = if wanted.is_empty() {
                declared.observables.iter().map(|(_, o)| o.clone()).collect()
            } else {
                wanted
                    .iter()
                    .map(|n| {
                        declared
                            .observable(n)
                            .cloned()
                            .ok_or_else(|| CliError::Invalid(format!("objective names unknown observable {n}")))
                    })
                    .collect::<Result<_, _>>()?
            };
            if measurements.is_empty() {
                return invalid("the fiducial objective needs at least one observable");
            }
            Ok(Objective::FiducialMeasurementEntropy(measurements))
        }
        other => invalid(format!(
            "unknown objective {other}; expected shannon, von_neumann or fiducial"
        )),
    }
}
