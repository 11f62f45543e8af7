use super::{entropy, MaxEntProblem, Objective};
use crate::com::{combine, ModelSpace, State};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::linalg::{dot, norm, reduce_rows};

/// Largest number of grid points evaluated at one refinement level.
const POINTS_PER_LEVEL: f64 = 2.0e6;
/// Largest classical dimension, vertex count or generator count searched.
const MAX_WEIGHTS: usize = 4;
const MEMBERSHIP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Found { state: State, entropy: f64 },
    Infeasible,
}

/// Search variables: mixing weights on the simplex, or a qubit's Bloch
/// vector in the unit ball. Both domains lie inside the unit Euclidean ball.
enum Domain {
    Simplex { points: Vec<Vec<f64>> },
    Bloch,
}

impl Domain {
    fn len(&self) -> usize {
        match self {
            Domain::Simplex { points } => points.len(),
            Domain::Bloch => 3,
        }
    }

    fn contains(&self, y: &[f64]) -> bool {
        match self {
            Domain::Simplex { .. } => y.iter().all(|&w| w >= -MEMBERSHIP),
            Domain::Bloch => norm(y) <= 1.0 + MEMBERSHIP,
        }
    }

    fn coords(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Domain::Simplex { points } => {
                let w: Vec<f64> = y.iter().map(|x| x.max(0.0)).collect();
                combine(points, &w)
            }
            Domain::Bloch => ModelSpace::operator_coords(&bloch_matrix(y)),
        }
    }
}

fn bloch_matrix(v: &[f64]) -> HermitianMatrix {
    let mut m = HermitianMatrix::identity(2);
    for (k, p) in [
        HermitianMatrix::pauli_x(),
        HermitianMatrix::pauli_y(),
        HermitianMatrix::pauli_z(),
    ]
    .iter()
    .enumerate()
    {
        m = &m + &p.scale(v[k]);
    }
    m.scale(0.5)
}

/// Brute-force maximization over a grid on the feasible affine slice.
///
/// Handles classical models of dimension at most 4, polytope models with at
/// most 4 vertices, regions with at most 4 generators, and qubit regions
/// given by equalities. The equalities are solved exactly, so every grid point meets them;
/// the grid lives in the null space of the equalities with spacing
/// `resolution`. Larger grids are refined coarse-to-fine around the best
/// point of the previous level.
pub fn oracle_maxent(problem: &MaxEntProblem, resolution: f64) -> Result<OracleOutcome> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::DegenerateInput("oracle resolution must be positive"));
    }
    let model = problem.model().clone();
    let domain = match (problem.region.generators(), model.vertices()) {
        (Some(gens), _) if gens.len() <= MAX_WEIGHTS => Domain::Simplex {
            points: gens.iter().map(|g| g.coords().to_vec()).collect(),
        },
        (None, Some(v)) if v.len() <= MAX_WEIGHTS => Domain::Simplex { points: v },
        (None, None) if model.hilbert_dim() == Some(2) => Domain::Bloch,
        _ => {
            return Err(Error::Unsupported(
                "oracle handles at most 4 weights or a single qubit".into(),
            ))
        }
    };
    if problem.region.is_contradictory() {
        return Ok(OracleOutcome::Infeasible);
    }
    if let Domain::Simplex { points } = &domain {
        if points.is_empty() {
            return Ok(OracleOutcome::Infeasible);
        }
    }

    // Equalities on the search variables.
    let n = domain.len();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    match &domain {
        Domain::Simplex { points } => {
            rows.push(vec![1.0; n]);
            rhs.push(1.0);
            for c in problem.region.constraints() {
                rows.push(points.iter().map(|p| dot(c.functional(), p)).collect());
                rhs.push(c.target());
            }
        }
        Domain::Bloch => {
            // tr(ρR) = (tr R + Σₖ vₖ tr(σₖR)) / 2
            let paulis = [
                HermitianMatrix::pauli_x(),
                HermitianMatrix::pauli_y(),
                HermitianMatrix::pauli_z(),
            ];
            for c in problem.region.constraints() {
                let r = model.operator_of_coords(c.functional())?;
                rows.push(paulis.iter().map(|p| 0.5 * r.trace_product(p)).collect());
                rhs.push(c.target() - 0.5 * r.trace());
            }
        }
    }
    let reduction = reduce_rows(&rows, &rhs, 1e-10, 1e-9);
    if !reduction.is_consistent() {
        return Ok(OracleOutcome::Infeasible);
    }
    let origin = reduction.particular_solution(n);
    let null = reduction.null_space(n);
    let k = null.len();

    let objective_at = |y: &[f64]| -> Result<f64> {
        match (&domain, &problem.objective) {
            (Domain::Bloch, Objective::VonNeumann) => Ok(super::binary_entropy(0.5 * (1.0 + norm(y).min(1.0)))),
            _ => entropy(&problem.objective, &State::trusted(model.clone(), domain.coords(y))),
        }
    };
    let point = |t: &[f64]| -> Vec<f64> {
        let mut y = origin.clone();
        for (q, &ti) in null.iter().zip(t) {
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += ti * qi;
            }
        }
        y
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    if k == 0 {
        if domain.contains(&origin) {
            best = Some((objective_at(&origin)?, Vec::new()));
        }
    } else {
        let mut center = vec![0.0; k];
        let mut half_width = 1.0;
        loop {
            let per_axis = POINTS_PER_LEVEL.powf(1.0 / k as f64).floor().max(2.0);
            let step = (2.0 * half_width / per_axis).max(resolution);
            let steps = (half_width / step).floor() as i64;
            let mut level_best: Option<(f64, Vec<f64>)> = None;
            let mut index = vec![-steps; k];
            'grid: loop {
                let t: Vec<f64> = center.iter().zip(&index).map(|(c, &i)| c + step * i as f64).collect();
                if norm(&t) <= 1.0 + MEMBERSHIP {
                    let y = point(&t);
                    if domain.contains(&y) {
                        let v = objective_at(&y)?;
                        if level_best.as_ref().is_none_or(|(b, _)| v > *b) {
                            level_best = Some((v, t));
                        }
                    }
                }
                for digit in index.iter_mut() {
                    if *digit < steps {
                        *digit += 1;
                        continue 'grid;
                    }
                    *digit = -steps;
                }
                break;
            }
            if let Some((v, t)) = level_best {
                if best.as_ref().is_none_or(|(b, _)| v >= *b) {
                    best = Some((v, t));
                }
            }
            if step <= resolution {
                break;
            }
            match &best {
                Some((_, t)) => center = t.clone(),
                None => break,
            }
            half_width = 2.0 * step;
        }
    }

    Ok(match best {
        None => OracleOutcome::Infeasible,
        Some((entropy, t)) => {
            let y = if k == 0 { origin.clone() } else { point(&t) };
            OracleOutcome::Found {
                state: State::trusted(model, domain.coords(&y)),
                entropy,
            }
        }
    })
}
