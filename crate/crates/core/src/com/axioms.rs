use super::model::ModelSpace;
use super::state::State;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::linalg::dot;

/// Residuals of the three state axioms over projections:
/// `s(0) = 0`, `s(P) + s(P⊥) = 1` and `s(Σ Pⱼ) = Σ s(Pⱼ)` for an orthogonal family.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub null_residual: f64,
    /// One entry per supplied projection.
    pub complement_residuals: Vec<f64>,
    pub additivity_residual: f64,
    pub tolerance: f64,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.complement_residuals
            .iter()
            .copied()
            .fold(self.null_residual.max(self.additivity_residual), f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tolerance
    }
}

/// Checks the axioms for the measure `P ↦ tr(ρP)` induced by a quantum state.
///
/// Probabilities are computed through the state's coordinates (the Born rule
/// as a dot product), not by multiplying matrices.
pub fn check_state_axioms(s: &State, projections: &[HermitianMatrix]) -> Result<AxiomReport> {
    let tol = Tolerances::default();
    let Some(d) = s.model().hilbert_dim() else {
        return Err(Error::ModelMismatch);
    };
    for p in projections {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        let idem = p.square().max_abs_diff(p);
        if idem > tol.loose_membership {
            return Err(Error::NotAProjection(idem));
        }
    }
    for (i, p) in projections.iter().enumerate() {
        for q in &projections[..i] {
            let overlap = p.matmul(q).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if overlap > tol.loose_membership {
                return Err(Error::NotOrthogonal(overlap));
            }
        }
    }
    let measure = |p: &HermitianMatrix| dot(&ModelSpace::operator_coords(p), s.coords());
    let identity = HermitianMatrix::identity(d);

    let null_residual = measure(&HermitianMatrix::zeros(d)).abs();
    let complement_residuals = projections
        .iter()
        .map(|p| (measure(p) + measure(&(&identity - p)) - 1.0).abs())
        .collect();
    let sum = projections.iter().fold(HermitianMatrix::zeros(d), |acc, p| &acc + p);
    let additivity_residual = (measure(&sum) - projections.iter().map(measure).sum::<f64>()).abs();
    Ok(AxiomReport {
        null_residual,
        complement_residuals,
        additivity_residual,
        tolerance: tol.axiom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axiom_examples() {
        let q = ModelSpace::quantum(2).unwrap();
        let half = State::maximally_mixed(q);
        let r = check_state_axioms(&half, &[HermitianMatrix::zeros(2)]).unwrap();
        assert_eq!(r.null_residual, 0.0);
        assert!(r.passed());

        let p0 = HermitianMatrix::diagonal(&[1.0, 0.0]);
        let r = check_state_axioms(&half, &[p0]).unwrap();
        assert!(r.complement_residuals[0] < 1e-15);

        let q3 = ModelSpace::quantum(3).unwrap();
        let rho = State::from_density_matrix(q3, &HermitianMatrix::diagonal(&[0.2, 0.3, 0.5])).unwrap();
        let fam = [
            HermitianMatrix::diagonal(&[1.0, 0.0, 0.0]),
            HermitianMatrix::diagonal(&[0.0, 1.0, 0.0]),
        ];
        let r = check_state_axioms(&rho, &fam).unwrap();
        assert!(r.additivity_residual < 1e-15);
        let sum = &fam[0] + &fam[1];
        let p = dot(&ModelSpace::operator_coords(&sum), rho.coords());
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn axiom_errors() {
        let half = State::maximally_mixed(ModelSpace::quantum(2).unwrap());
        let err = check_state_axioms(&half, &[HermitianMatrix::diagonal(&[0.5, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::NotAProjection(_)));
        let plus = HermitianMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let err = check_state_axioms(&half, &[HermitianMatrix::diagonal(&[1.0, 0.0]), plus]).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal(_)));
    }
}
