use std::fmt;
use std::sync::Arc;

use super::model::ModelSpace;
use super::state::State;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::linalg::dot;

/// A linear functional `f` with `0 ≤ f ≤ u` on the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    model: Arc<ModelSpace>,
    functional: Vec<f64>,
}

impl Effect {
    /// Checks `0 ≤ f(ω) ≤ 1` on every extreme state.
    pub fn new(model: Arc<ModelSpace>, functional: Vec<f64>) -> Result<Self> {
        let tol = Tolerances::default().membership;
        let (lo, hi) = model.functional_range(&functional)?;
        if lo < -tol {
            return Err(Error::InvalidEffect(format!("takes negative value {lo}")));
        }
        if hi > 1.0 + tol {
            return Err(Error::InvalidEffect(format!("exceeds the unit functional ({hi})")));
        }
        Ok(Self { model, functional })
    }

    /// Stores the functional without range checks; used for observables that
    /// are validated later by [`validate_povm`].
    pub fn unchecked(model: Arc<ModelSpace>, functional: Vec<f64>) -> Result<Self> {
        model.check_len(&functional)?;
        Ok(Self { model, functional })
    }

    pub fn from_operator(model: Arc<ModelSpace>, e: &HermitianMatrix) -> Result<Self> {
        let f = model.coords_of_operator(e)?;
        Self::new(model, f)
    }

    /// The unit effect `u`.
    pub fn unit(model: Arc<ModelSpace>) -> Self {
        let functional = model.unit_functional();
        Self { model, functional }
    }

    pub fn model(&self) -> &Arc<ModelSpace> {
        &self.model
    }

    pub fn functional(&self) -> &[f64] {
        &self.functional
    }

    /// `u − f`.
    pub fn complement(&self) -> Effect {
        let functional = self
            .model
            .unit_functional()
            .iter()
            .zip(&self.functional)
            .map(|(u, f)| u - f)
            .collect();
        Effect {
            model: self.model.clone(),
            functional,
        }
    }
}

/// Probability of the effect in the state: `f(ω)`, i.e. `tr(Eρ)` for
/// quantum models. Values within `1e-10` outside `[0, 1]` are clamped.
pub fn evaluate(e: &Effect, s: &State) -> Result<f64> {
    if e.model != *s.model() {
        return Err(Error::ModelMismatch);
    }
    let p = dot(&e.functional, s.coords());
    let tol = Tolerances::default().membership;
    Ok(if (-tol..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + tol {
        1.0
    } else {
        p
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub effect: Effect,
    pub value: Option<f64>,
}

/// A finite outcome-labelled family of effects summing to `u`, optionally
/// carrying a real value per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    model: Arc<ModelSpace>,
    outcomes: Vec<Outcome>,
}

impl Observable {
    /// Builds and validates; any violation is reported as `InvalidObservable`.
    pub fn new(model: Arc<ModelSpace>, outcomes: Vec<Outcome>) -> Result<Self> {
        let obs = Self::unchecked(model, outcomes);
        let report = validate_povm(&obs);
        if !report.is_valid() {
            return Err(Error::InvalidObservable(report.to_string()));
        }
        Ok(obs)
    }

    pub fn unchecked(model: Arc<ModelSpace>, outcomes: Vec<Outcome>) -> Self {
        Self { model, outcomes }
    }

    /// Convenience constructor from `(label, functional, value)` triples.
    pub fn from_functionals(model: Arc<ModelSpace>, outcomes: Vec<(String, Vec<f64>, Option<f64>)>) -> Result<Self> {
        let outcomes = outcomes
            .into_iter()
            .map(|(label, f, value)| {
                Ok(Outcome {
                    label,
                    effect: Effect::unchecked(model.clone(), f)?,
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, outcomes)
    }

    /// The projection-valued observable of a Hermitian operator: one outcome
    /// per distinct eigenvalue (within `1e-9`), valued by that eigenvalue.
    pub fn spectral(model: Arc<ModelSpace>, m: &HermitianMatrix) -> Result<Self> {
        model.coords_of_operator(m)?;
        let e = m.eig()?;
        let mut groups: Vec<(f64, HermitianMatrix)> = Vec::new();
        for (j, &k) in e.eigenvalues.iter().enumerate() {
            let p = HermitianMatrix::outer(&e.vector(j));
            match groups.last_mut() {
                Some((value, proj)) if (k - *value).abs() <= 1e-9 => *proj = &*proj + &p,
                _ => groups.push((k, p)),
            }
        }
        let outcomes = groups
            .into_iter()
            .map(|(value, p)| {
                Ok(Outcome {
                    label: format!("{value}"),
                    effect: Effect::unchecked(model.clone(), ModelSpace::operator_coords(&p))?,
                    value: Some(value),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, outcomes)
    }

    pub fn model(&self) -> &Arc<ModelSpace> {
        &self.model
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn outcome(&self, label: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.label == label)
    }

    pub fn has_values(&self) -> bool {
        self.outcomes.iter().all(|o| o.value.is_some())
    }

    /// `Σ valueₓ·Fₓ`, the functional whose evaluation is the mean value.
    pub fn mean_functional(&self) -> Result<Vec<f64>> {
        let mut f = vec![0.0; self.model.ambient_dim()];
        for o in &self.outcomes {
            let v = o.value.ok_or(Error::NoValues)?;
            for (fi, ei) in f.iter_mut().zip(o.effect.functional()) {
                *fi += v * ei;
            }
        }
        Ok(f)
    }

    /// Outcome probabilities `p_ω(x) = Fₓ(ω)`.
    pub fn distribution(&self, s: &State) -> Result<Vec<f64>> {
        self.outcomes.iter().map(|o| evaluate(&o.effect, s)).collect()
    }
}

/// `⟨F⟩_ω = Σᵢ fᵢ·F_{fᵢ}(ω)`.
pub fn mean_value(obs: &Observable, s: &State) -> Result<f64> {
    if !obs.has_values() {
        return Err(Error::NoValues);
    }
    let mut acc = 0.0;
    for o in &obs.outcomes {
        acc += o.value.unwrap_or_default() * evaluate(&o.effect, s)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PovmViolation {
    /// An outcome belongs to a different model.
    ModelMismatch {
        outcome: usize,
    },
    /// `Σ Fₓ ≠ u`; `residual` is `u − Σ Fₓ`. `norm` is the operator norm of the residual for quantum
    /// models and its largest component otherwise.
    Incomplete {
        residual: Vec<f64>,
        norm: f64,
    },
    Negative {
        outcome: usize,
        label: String,
        min: f64,
    },
    ExceedsUnit {
        outcome: usize,
        label: String,
        max: f64,
    },
}

impl fmt::Display for PovmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PovmViolation::ModelMismatch { outcome } => {
                write!(f, "outcome {outcome} belongs to a different model")
            }
            PovmViolation::Incomplete { norm, .. } => {
                write!(f, "effects do not sum to the unit (residual norm {norm:.16e})")
            }
            PovmViolation::Negative { label, min, .. } => {
                write!(f, "effect '{label}' is not positive (minimum {min:.16e})")
            }
            PovmViolation::ExceedsUnit { label, max, .. } => {
                write!(f, "effect '{label}' exceeds the unit (maximum {max:.16e})")
            }
        }
    }
}

/// Everything wrong with a finite-outcome POVM. Empty iff valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PovmReport {
    pub violations: Vec<PovmViolation>,
    /// Largest componentwise deviation of `Σ Fₓ` from `u`.
    pub completeness_residual: f64,
}

impl PovmReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for PovmReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks normalization `Σ Fₓ = u` and `0 ≤ Fₓ ≤ u` for each outcome.
/// Additivity over disjoint outcome sets is automatic for finite families.
pub fn validate_povm(obs: &Observable) -> PovmReport {
    let tol = Tolerances::default();
    let model = &obs.model;
    let mut report = PovmReport::default();
    let mut sum = vec![0.0; model.ambient_dim()];
    for (i, o) in obs.outcomes.iter().enumerate() {
        if o.effect.model != *model {
            report.violations.push(PovmViolation::ModelMismatch { outcome: i });
            continue;
        }
        for (s, x) in sum.iter_mut().zip(o.effect.functional()) {
            *s += x;
        }
        match model.functional_range(o.effect.functional()) {
            Ok((lo, hi)) => {
                if lo < -tol.membership {
                    report.violations.push(PovmViolation::Negative {
                        outcome: i,
                        label: o.label.clone(),
                        min: lo,
                    });
                }
                if hi > 1.0 + tol.membership {
                    report.violations.push(PovmViolation::ExceedsUnit {
                        outcome: i,
                        label: o.label.clone(),
                        max: hi,
                    });
                }
            }
            Err(_) => report.violations.push(PovmViolation::ModelMismatch { outcome: i }),
        }
    }
    let residual: Vec<f64> = sum.iter().zip(model.unit_functional()).map(|(s, u)| u - s).collect();
    let max = residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    report.completeness_residual = max;
    if max > tol.completeness {
        let norm = match model.as_ref() {
            ModelSpace::Quantum { dim } => ModelSpace::operator_from_coords(*dim, &residual)
                .and_then(|r| r.eig())
                .map(|e| e.eigenvalues.iter().fold(0.0f64, |m, k| m.max(k.abs())))
                .unwrap_or(max),
            _ => max,
        };
        report
            .violations
            .insert(0, PovmViolation::Incomplete { residual, norm });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_effect(model: &Arc<ModelSpace>, d: &[f64]) -> Vec<f64> {
        model.coords_of_operator(&HermitianMatrix::diagonal(d)).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let q = ModelSpace::quantum(2).unwrap();
        let e = Effect::from_operator(q.clone(), &HermitianMatrix::diagonal(&[1.0, 0.0])).unwrap();
        assert!((evaluate(&e, &State::maximally_mixed(q.clone())).unwrap() - 0.5).abs() < 1e-15);

        let c = ModelSpace::classical(3).unwrap();
        let e1 = Effect::new(c.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let s = State::new(c.clone(), vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(evaluate(&e1, &s).unwrap(), 0.2);

        let e = Effect::from_operator(q.clone(), &HermitianMatrix::diagonal(&[0.3, 0.7])).unwrap();
        let rho = State::from_density_matrix(q.clone(), &HermitianMatrix::diagonal(&[0.125, 0.875])).unwrap();
        assert!((evaluate(&e, &rho).unwrap() - 0.65).abs() < 1e-15);

        assert_eq!(evaluate(&e1, &rho).unwrap_err(), Error::ModelMismatch);
    }

    #[test]
    fn effect_range_checks() {
        let q = ModelSpace::quantum(2).unwrap();
        assert!(Effect::from_operator(q.clone(), &HermitianMatrix::diagonal(&[1.2, 0.0])).is_err());
        assert!(Effect::from_operator(q, &HermitianMatrix::diagonal(&[-0.2, 1.0])).is_err());
        let sq = ModelSpace::square_bit();
        assert!(Effect::new(sq.clone(), vec![0.5, 0.5, 0.0]).is_ok());
        assert!(Effect::new(sq, vec![0.5, 0.6, 0.0]).is_err());
    }

    #[test]
    fn mean_value_examples() {
        let q = ModelSpace::quantum(2).unwrap();
        let sz = Observable::spectral(q.clone(), &HermitianMatrix::pauli_z()).unwrap();
        let half = State::maximally_mixed(q.clone());
        assert!(mean_value(&sz, &half).unwrap().abs() < 1e-15);
        let rho = State::from_density_matrix(q, &HermitianMatrix::diagonal(&[0.75, 0.25])).unwrap();
        assert!((mean_value(&sz, &rho).unwrap() - 0.5).abs() < 1e-15);

        let c = ModelSpace::classical(2).unwrap();
        let obs = Observable::from_functionals(
            c.clone(),
            vec![
                ("a".into(), vec![1.0, 0.0], Some(0.0)),
                ("b".into(), vec![0.0, 1.0], Some(1.0)),
            ],
        )
        .unwrap();
        let s = State::new(c.clone(), vec![0.7, 0.3]).unwrap();
        assert!((mean_value(&obs, &s).unwrap() - 0.3).abs() < 1e-15);

        let novals = Observable::from_functionals(
            c,
            vec![
                ("a".into(), vec![1.0, 0.0], None),
                ("b".into(), vec![0.0, 1.0], Some(1.0)),
            ],
        )
        .unwrap();
        assert_eq!(mean_value(&novals, &s).unwrap_err(), Error::NoValues);
    }

    #[test]
    fn povm_validation_examples() {
        let q = ModelSpace::quantum(2).unwrap();
        let make = |effects: &[&[f64]]| {
            let outcomes = effects
                .iter()
                .enumerate()
                .map(|(i, d)| Outcome {
                    label: format!("e{i}"),
                    effect: Effect::unchecked(q.clone(), diag_effect(&q, d)).unwrap(),
                    value: None,
                })
                .collect();
            Observable::unchecked(q.clone(), outcomes)
        };

        assert!(validate_povm(&make(&[&[0.3, 0.7], &[0.7, 0.3]])).is_valid());

        let report = validate_povm(&make(&[&[1.2, 0.0], &[-0.2, 1.0]]));
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, PovmViolation::ExceedsUnit { outcome: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, PovmViolation::Negative { outcome: 1, .. })));

        let report = validate_povm(&make(&[&[0.5, 0.5]]));
        match &report.violations[..] {
            [PovmViolation::Incomplete { residual, norm }] => {
                let r = q.operator_of_coords(residual).unwrap();
                assert!(r.max_abs_diff(&HermitianMatrix::diagonal(&[0.5, 0.5])) < 1e-15);
                assert!((norm - 0.5).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
