use std::sync::Arc;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::linalg::dot;

/// Which family a model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Classical,
    Quantum,
    Polytope,
}

/// A convex operational model: an ambient real vector space, a unit
/// functional `u`, and a positive cone whose `u = 1` slice is the state space.
///
/// * `Classical(d)`: probability vectors in `ℝᵈ`, `u` = all-ones.
/// * `Quantum(d)`: `d×d` density matrices in `d²` real coordinates with
///   respect to an orthonormal Hermitian basis (see [`ModelSpace::operator_coords`]),
///   `u` = trace.
/// * `Polytope`: the convex hull of finitely many vertices, each with `u(v) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpace {
    Classical { dim: usize },
    Quantum { dim: usize },
    Polytope(PolytopeModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeModel {
    vertices: Vec<Vec<f64>>,
    unit: Vec<f64>,
}

impl PolytopeModel {
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
}

impl ModelSpace {
    pub fn classical(dim: usize) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::InvalidModel("classical dimension must be at least 1".into()));
        }
        Ok(Arc::new(ModelSpace::Classical { dim }))
    }

    pub fn quantum(dim: usize) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::InvalidModel("Hilbert space dimension must be at least 1".into()));
        }
        Ok(Arc::new(ModelSpace::Quantum { dim }))
    }

    /// A polytope model from vertices given in the ambient space together
    /// with the unit functional.
    pub fn polytope(vertices: Vec<Vec<f64>>, unit: Vec<f64>) -> Result<Arc<Self>> {
        let tol = Tolerances::default();
        let n = unit.len();
        if n == 0 || vertices.is_empty() {
            return Err(Error::InvalidModel("polytope needs at least one vertex".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != n {
                return Err(Error::InvalidModel(format!(
                    "vertex {i} has length {}, expected {n}",
                    v.len()
                )));
            }
            let uv = dot(&unit, v);
            if (uv - 1.0).abs() > tol.vertex_unit {
                return Err(Error::InvalidModel(format!("unit functional is {uv} on vertex {i}")));
            }
        }
        for i in 0..vertices.len() {
            for j in 0..i {
                if max_diff(&vertices[i], &vertices[j]) < tol.loose_membership {
                    return Err(Error::InvalidModel(format!("vertices {j} and {i} coincide")));
                }
            }
        }
        Ok(Arc::new(ModelSpace::Polytope(PolytopeModel { vertices, unit })))
    }

    /// A polytope whose vertices are given in affine coordinates. Each point
    /// `p` is embedded as `(1, p)` and `u` reads off the first coordinate.
    pub fn polytope_affine(points: &[Vec<f64>]) -> Result<Arc<Self>> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidModel("polytope needs at least one vertex".into()));
        };
        let n = first.len() + 1;
        let vertices = points
            .iter()
            .map(|p| std::iter::once(1.0).chain(p.iter().copied()).collect())
            .collect();
        let mut unit = vec![0.0; n];
        unit[0] = 1.0;
        Self::polytope(vertices, unit)
    }

    /// The square bit: states form the square with corners `(±1, ±1)`.
    pub fn square_bit() -> Arc<Self> {
        Self::polytope_affine(&[vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0], vec![-1.0, 1.0]])
            .expect("square bit vertices are valid")
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpace::Classical { .. } => ModelKind::Classical,
            ModelSpace::Quantum { .. } => ModelKind::Quantum,
            ModelSpace::Polytope(_) => ModelKind::Polytope,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ModelSpace::Classical { dim } => *dim,
            ModelSpace::Quantum { dim } => dim * dim,
            ModelSpace::Polytope(p) => p.unit.len(),
        }
    }

    /// Hilbert-space dimension for quantum models.
    pub fn hilbert_dim(&self) -> Option<usize> {
        match self {
            ModelSpace::Quantum { dim } => Some(*dim),
            _ => None,
        }
    }

    pub fn unit_functional(&self) -> Vec<f64> {
        match self {
            ModelSpace::Classical { dim } => vec![1.0; *dim],
            ModelSpace::Quantum { dim } => {
                let mut u = vec![0.0; dim * dim];
                u[0] = (*dim as f64).sqrt();
                u
            }
            ModelSpace::Polytope(p) => p.unit.clone(),
        }
    }

    /// Extreme points of the state space, when there are finitely many.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            ModelSpace::Classical { dim } => Some(
                (0..*dim)
                    .map(|i| {
                        let mut e = vec![0.0; *dim];
                        e[i] = 1.0;
                        e
                    })
                    .collect(),
            ),
            ModelSpace::Quantum { .. } => None,
            ModelSpace::Polytope(p) => Some(p.vertices.clone()),
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, ModelSpace::Quantum { .. })
    }

    /// Real coordinates of a Hermitian operator in the orthonormal basis
    /// `{I/√d, S_jk, A_jk (j<k), D_l (l = 1..d-1)}` with
    /// `S_jk = (|j⟩⟨k| + |k⟩⟨j|)/√2`, `A_jk = (−i|j⟩⟨k| + i|k⟩⟨j|)/√2` and the
    /// traceless diagonal generators
    /// `D_l = (Σ_{j<l} |j⟩⟨j| − l·|l⟩⟨l|)/√(l(l+1))`.
    ///
    /// The basis is orthonormal under `⟨A, B⟩ = tr(AB)`, so `tr(A·B)` equals
    /// the dot product of coordinates.
    pub fn operator_coords(m: &HermitianMatrix) -> Vec<f64> {
        let d = m.dim();
        let mut c = Vec::with_capacity(d * d);
        c.push(m.trace() / (d as f64).sqrt());
        let s2 = std::f64::consts::SQRT_2;
        for j in 0..d {
            for k in (j + 1)..d {
                let z = m.get(j, k);
                c.push(s2 * z.re);
                c.push(-s2 * z.im);
            }
        }
        for l in 1..d {
            let lf = l as f64;
            let head: f64 = (0..l).map(|j| m.get(j, j).re).sum();
            c.push((head - lf * m.get(l, l).re) / (lf * (lf + 1.0)).sqrt());
        }
        c
    }

    /// Inverse of [`ModelSpace::operator_coords`].
    pub fn operator_from_coords(d: usize, c: &[f64]) -> Result<HermitianMatrix> {
        if c.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: c.len(),
            });
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        let s2 = std::f64::consts::SQRT_2;
        let mut idx = 1;
        for j in 0..d {
            for k in (j + 1)..d {
                let z = Complex64::new(c[idx], -c[idx + 1]) / s2;
                entries[j * d + k] = z;
                entries[k * d + j] = z.conj();
                idx += 2;
            }
        }
        let base = c[0] / (d as f64).sqrt();
        let mut diag = vec![base; d];
        for l in 1..d {
            let lf = l as f64;
            let w = c[idx] / (lf * (lf + 1.0)).sqrt();
            for item in diag.iter_mut().take(l) {
                *item += w;
            }
            diag[l] -= lf * w;
            idx += 1;
        }
        for (j, v) in diag.into_iter().enumerate() {
            entries[j * d + j] = Complex64::new(v, 0.0);
        }
        Ok(HermitianMatrix::symmetrized(d, entries))
    }

    /// Coordinates of a Hermitian operator on this (quantum) model.
    pub fn coords_of_operator(&self, m: &HermitianMatrix) -> Result<Vec<f64>> {
        match self {
            ModelSpace::Quantum { dim } if *dim == m.dim() => Ok(Self::operator_coords(m)),
            ModelSpace::Quantum { dim } => Err(Error::DimensionMismatch {
                expected: *dim,
                found: m.dim(),
            }),
            _ => Err(Error::ModelMismatch),
        }
    }

    pub fn operator_of_coords(&self, c: &[f64]) -> Result<HermitianMatrix> {
        match self {
            ModelSpace::Quantum { dim } => Self::operator_from_coords(*dim, c),
            _ => Err(Error::ModelMismatch),
        }
    }

    pub(crate) fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Smallest and largest value a functional takes on the state space.
    pub fn functional_range(&self, f: &[f64]) -> Result<(f64, f64)> {
        self.check_len(f)?;
        match self {
            ModelSpace::Quantum { dim } => {
                let e = Self::operator_from_coords(*dim, f)?.eig()?;
                Ok((e.eigenvalues[0], e.eigenvalues[dim - 1]))
            }
            _ => {
                let values: Vec<f64> = self
                    .vertices()
                    .expect("polyhedral model")
                    .iter()
                    .map(|v| dot(f, v))
                    .collect();
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((lo, hi))
            }
        }
    }
}

pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
