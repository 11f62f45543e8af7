use super::Objective;
use crate::com::{ModelKind, State};
use crate::error::{Error, Result};
use crate::hermitian::eig;
use crate::linalg::dot;

/// `−Σ pᵢ ln pᵢ` with `0·ln 0 = 0`. Tiny negative entries from round-off
/// count as zero.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// `−tr(ρ ln ρ)` from the spectrum of `ρ`.
pub fn von_neumann_entropy(s: &State) -> Result<f64> {
    let rho = s.density_matrix()?;
    Ok(shannon_entropy(&eig(&rho)?.eigenvalues))
}

/// Evaluates an objective at a state.
pub fn entropy(objective: &Objective, s: &State) -> Result<f64> {
    let kind = s.model().kind();
    match objective {
        Objective::Shannon if kind == ModelKind::Classical => Ok(shannon_entropy(s.coords())),
        Objective::VonNeumann if kind == ModelKind::Quantum => von_neumann_entropy(s),
        Objective::FiducialMeasurementEntropy(ms) => Ok(fiducial_value(ms, s.coords())),
        Objective::Custom(c) => Ok(c.value(s.coords())),
        _ => Err(Error::IncompatibleObjective(format!(
            "{objective:?} on a {kind:?} state"
        ))),
    }
}

pub(crate) fn fiducial_value(measurements: &[crate::com::Observable], x: &[f64]) -> f64 {
    measurements
        .iter()
        .map(|m| {
            let q: Vec<f64> = m.outcomes().iter().map(|o| dot(o.effect.functional(), x)).collect();
            shannon_entropy(&q)
        })
        .sum()
}

/// Smallest probability used in `ln` when forming gradients.
const GRADIENT_FLOOR: f64 = 1e-300;

pub(crate) fn fiducial_gradient(measurements: &[crate::com::Observable], x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for m in measurements {
        for o in m.outcomes() {
            let f = o.effect.functional();
            let q = dot(f, x).max(GRADIENT_FLOOR);
            let w = -(q.ln() + 1.0);
            for (gi, fi) in g.iter_mut().zip(f) {
                *gi += w * fi;
            }
        }
    }
    g
}

pub(crate) fn shannon_gradient(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| -(x.max(GRADIENT_FLOOR).ln() + 1.0)).collect()
}
