use std::sync::Arc;

use num_complex::Complex64;

use super::model::{max_diff, ModelSpace};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::{eig, HermitianMatrix};
use crate::linalg::dot;
use crate::lp::{LinearProgram, LpOutcome};

/// A normalized element of a model's positive cone.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    model: Arc<ModelSpace>,
    coords: Vec<f64>,
}

impl State {
    /// Validates `u(coords) = 1` and cone membership.
    pub fn new(model: Arc<ModelSpace>, coords: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(model, coords, &Tolerances::default())
    }

    pub fn with_tolerances(model: Arc<ModelSpace>, coords: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        model.check_len(&coords)?;
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite coordinate".into()));
        }
        let norm = dot(&model.unit_functional(), &coords);
        if (norm - 1.0).abs() > tol.membership {
            return Err(Error::InvalidState(format!("unit functional is {norm}, expected 1")));
        }
        match model.as_ref() {
            ModelSpace::Classical { .. } => {
                let min = coords.iter().copied().fold(f64::INFINITY, f64::min);
                if min < -tol.membership {
                    return Err(Error::InvalidState(format!("negative probability {min}")));
                }
            }
            ModelSpace::Quantum { dim } => {
                let rho = ModelSpace::operator_from_coords(*dim, &coords)?;
                let kmin = eig(&rho)?.eigenvalues[0];
                if kmin < -tol.membership {
                    return Err(Error::InvalidState(format!("negative eigenvalue {kmin}")));
                }
            }
            ModelSpace::Polytope(p) => {
                if mixing_weights(p.vertices(), &coords, tol.loose_membership).is_none() {
                    return Err(Error::InvalidState("not a convex combination of the vertices".into()));
                }
            }
        }
        Ok(Self { model, coords })
    }

    /// Skips validation. Callers guarantee the invariants.
    pub(crate) fn trusted(model: Arc<ModelSpace>, coords: Vec<f64>) -> Self {
        Self { model, coords }
    }

    pub fn from_density_matrix(model: Arc<ModelSpace>, rho: &HermitianMatrix) -> Result<Self> {
        let coords = model.coords_of_operator(rho)?;
        Self::new(model, coords)
    }

    /// The state `Σ wᵢ vᵢ` for mixing weights over the model's vertices.
    pub fn from_weights(model: Arc<ModelSpace>, weights: &[f64]) -> Result<Self> {
        let vertices = model
            .vertices()
            .ok_or_else(|| Error::Unsupported("mixing weights need a polyhedral model".into()))?;
        if weights.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: vertices.len(),
                found: weights.len(),
            });
        }
        let coords = combine(&vertices, weights);
        Self::new(model, coords)
    }

    /// The maximally mixed state: uniform classical distribution, `I/d`, or
    /// the vertex barycenter.
    pub fn maximally_mixed(model: Arc<ModelSpace>) -> Self {
        let coords = match model.as_ref() {
            ModelSpace::Quantum { dim } => {
                ModelSpace::operator_coords(&HermitianMatrix::identity(*dim).scale(1.0 / *dim as f64))
            }
            _ => {
                let v = model.vertices().expect("polyhedral model");
                let w = vec![1.0 / v.len() as f64; v.len()];
                combine(&v, &w)
            }
        };
        Self { model, coords }
    }

    pub fn model(&self) -> &Arc<ModelSpace> {
        &self.model
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn density_matrix(&self) -> Result<HermitianMatrix> {
        self.model.operator_of_coords(&self.coords)
    }

    /// Distance in the ambient coordinates (max norm).
    pub fn distance(&self, other: &State) -> f64 {
        max_diff(&self.coords, &other.coords)
    }
}

pub(crate) fn combine(vectors: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = vectors.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (v, &w) in vectors.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Phase-I LP: weights `w ≥ 0`, `Σ w = 1` with `Σ wᵢ vᵢ = point`.
pub(crate) fn mixing_weights(vertices: &[Vec<f64>], point: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = vertices.len();
    let dim = point.len();
    let rows = dim + 1;
    let mut a = vec![0.0; rows * n];
    for (j, v) in vertices.iter().enumerate() {
        for i in 0..dim {
            a[i * n + j] = v[i];
        }
        a[dim * n + j] = 1.0;
    }
    let mut b = point.to_vec();
    b.push(1.0);
    match LinearProgram::new(rows, n, a, b).feasible_point(tol) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

/// `|ψ⟩⟨ψ|` for the normalized amplitude vector.
pub fn pure_state_from_vector(model: Arc<ModelSpace>, amplitudes: &[Complex64]) -> Result<State> {
    let Some(d) = model.hilbert_dim() else {
        return Err(Error::ModelMismatch);
    };
    if amplitudes.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: amplitudes.len(),
        });
    }
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateInput("amplitude vector is zero"));
    }
    let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
    let rho = HermitianMatrix::outer(&psi);
    let coords = ModelSpace::operator_coords(&rho);
    Ok(State::trusted(model, coords))
}

/// Whether the state is an extreme point of the state space.
pub fn is_pure(s: &State) -> bool {
    let tol = Tolerances::default().loose_membership;
    match s.model.as_ref() {
        ModelSpace::Quantum { .. } => match s.density_matrix() {
            Ok(rho) => rho.square().max_abs_diff(&rho) <= tol,
            Err(_) => false,
        },
        _ => s
            .model
            .vertices()
            .expect("polyhedral model")
            .iter()
            .any(|v| max_diff(v, &s.coords) <= tol),
    }
}

/// Eigen-decomposes a density matrix into a convex mixture of pure states.
/// Components with weight below `1e-12` are dropped.
pub fn spectral_mixture(s: &State) -> Result<Vec<(f64, State)>> {
    let rho = s.density_matrix()?;
    let e = eig(&rho)?;
    let mut weights: Vec<f64> = e.eigenvalues.iter().map(|&k| k.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut out = Vec::new();
    for (j, &w) in weights.iter().enumerate().rev() {
        if w <= 1e-12 {
            continue;
        }
        let projector = HermitianMatrix::outer(&e.vector(j));
        out.push((
            w,
            State::trusted(s.model.clone(), ModelSpace::operator_coords(&projector)),
        ));
    }
    let kept: f64 = out.iter().map(|(w, _)| w).sum();
    out.iter_mut().for_each(|(w, _)| *w /= kept);
    Ok(out)
}
