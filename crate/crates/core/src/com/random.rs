//! Seeded generators for states, effects, observables and projections.
//!
//! Generators take any `Rng`; tests use a seeded `ChaCha` so runs repeat.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::model::ModelSpace;
use super::observable::{Effect, Observable, Outcome};
use super::state::{combine, State};
use crate::hermitian::HermitianMatrix;
use crate::linalg::dot;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Dirichlet(1, …, 1) weights.
pub fn dirichlet_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Hermitian matrix with independent Gaussian entries of the given scale.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> HermitianMatrix {
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        entries[i * d + i] = Complex64::new(scale * gaussian(rng), 0.0);
        for j in (i + 1)..d {
            let z = complex_gaussian(rng) * (scale / std::f64::consts::SQRT_2);
            entries[i * d + j] = z;
            entries[j * d + i] = z.conj();
        }
    }
    HermitianMatrix::symmetrized(d, entries)
}

/// Unitary from the eigenvectors of a random Hermitian matrix, row-major.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    random_hermitian(d, 1.0, rng)
        .eig()
        .expect("Jacobi converges on random input")
        .eigenvectors
}

/// `G·G†/tr(G·G†)` with a complex Gaussian `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g: Vec<Complex64> = (0..d * d).map(|_| complex_gaussian(rng)).collect();
    let mut gg = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            gg[i * d + j] = (0..d).map(|k| g[i * d + k] * g[j * d + k].conj()).sum();
        }
    }
    let m = HermitianMatrix::symmetrized(d, gg);
    m.scale(1.0 / m.trace())
}

/// A full-support random state.
pub fn random_state<R: Rng + ?Sized>(model: &Arc<ModelSpace>, rng: &mut R) -> State {
    let coords = match model.as_ref() {
        ModelSpace::Classical { dim } => {
            let w: Vec<f64> = (0..*dim).map(|_| gaussian(rng).exp()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        }
        ModelSpace::Quantum { dim } => ModelSpace::operator_coords(&random_density_matrix(*dim, rng)),
        ModelSpace::Polytope(p) => combine(p.vertices(), &dirichlet_weights(p.vertices().len(), rng)),
    };
    State::trusted(model.clone(), coords)
}

/// A random effect whose range on the state space lies inside `[0, 1]`.
pub fn random_effect<R: Rng + ?Sized>(model: &Arc<ModelSpace>, rng: &mut R) -> Effect {
    let functional = match model.as_ref() {
        ModelSpace::Classical { dim } => (0..*dim).map(|_| rng.random::<f64>()).collect(),
        ModelSpace::Quantum { dim } => {
            let d = *dim;
            let u = random_unitary(d, rng);
            let spectrum: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in 0..d {
                    entries[i * d + j] = (0..d).map(|a| u[i * d + a] * u[j * d + a].conj() * spectrum[a]).sum();
                }
            }
            ModelSpace::operator_coords(&HermitianMatrix::symmetrized(d, entries))
        }
        ModelSpace::Polytope(p) => {
            let n = model.ambient_dim();
            let g: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
            let values: Vec<f64> = p.vertices().iter().map(|v| dot(&g, v)).collect();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let unit = model.unit_functional();
            // Map the range of g affinely onto a random sub-interval of [0, 1].
            let a = rng.random::<f64>();
            let b = rng.random::<f64>();
            let (start, end) = (a.min(b), a.max(b));
            let slope = if hi > lo { (end - start) / (hi - lo) } else { 0.0 };
            g.iter()
                .zip(&unit)
                .map(|(gi, ui)| slope * gi + (start - slope * lo) * ui)
                .collect()
        }
    };
    Effect::unchecked(model.clone(), functional).expect("length matches model")
}

/// A random POVM with `outcomes` outcomes and values `0, 1, …`.
pub fn random_povm<R: Rng + ?Sized>(model: &Arc<ModelSpace>, outcomes: usize, rng: &mut R) -> Observable {
    let functionals: Vec<Vec<f64>> = match model.as_ref() {
        ModelSpace::Classical { dim } => {
            let columns: Vec<Vec<f64>> = (0..*dim).map(|_| dirichlet_weights(outcomes, rng)).collect();
            (0..outcomes)
                .map(|k| columns.iter().map(|col| col[k]).collect())
                .collect()
        }
        ModelSpace::Quantum { dim } => {
            let d = *dim;
            let parts: Vec<HermitianMatrix> = (0..outcomes).map(|_| random_density_matrix(d, rng)).collect();
            let total = parts.iter().fold(HermitianMatrix::zeros(d), |acc, p| &acc + p);
            let inv_sqrt = total.eig().expect("converges").map(|k| 1.0 / k.sqrt());
            parts
                .iter()
                .map(|p| {
                    let m = crate::hermitian::mul(
                        d,
                        inv_sqrt.entries(),
                        &crate::hermitian::mul(d, p.entries(), inv_sqrt.entries()),
                    );
                    ModelSpace::operator_coords(&HermitianMatrix::symmetrized(d, m))
                })
                .collect()
        }
        ModelSpace::Polytope(_) => {
            let e = random_effect(model, rng);
            let ec = e.complement();
            let on = dirichlet_weights(outcomes, rng);
            let off = dirichlet_weights(outcomes, rng);
            (0..outcomes)
                .map(|k| {
                    e.functional()
                        .iter()
                        .zip(ec.functional())
                        .map(|(a, b)| on[k] * a + off[k] * b)
                        .collect()
                })
                .collect()
        }
    };
    let outcomes = functionals
        .into_iter()
        .enumerate()
        .map(|(k, f)| Outcome {
            label: format!("o{k}"),
            effect: Effect::unchecked(model.clone(), f).expect("length matches model"),
            value: Some(k as f64),
        })
        .collect();
    Observable::unchecked(model.clone(), outcomes)
}

/// A random family of pairwise orthogonal projections in dimension `d`:
/// a random orthonormal basis split into groups, some of which are kept.
pub fn random_projection_family<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<HermitianMatrix> {
    let u = random_unitary(d, rng);
    let groups = rng.random_range(1..=d);
    let mut family = vec![HermitianMatrix::zeros(d); groups];
    for col in 0..d {
        let g = rng.random_range(0..groups);
        let v: Vec<Complex64> = (0..d).map(|i| u[i * d + col]).collect();
        family[g] = &family[g] + &HermitianMatrix::outer(&v);
    }
    family.retain(|p| p.max_abs() > 0.0 && rng.random::<f64>() < 0.8);
    family
}
