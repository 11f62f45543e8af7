use super::entropy::{fiducial_gradient, fiducial_value, shannon_entropy, shannon_gradient};
use super::{residuals, MaxEntProblem, MaxEntSolution, Objective, SolveStatus};
use crate::com::{combine, max_diff, ModelSpace, State};
use crate::error::{Error, Result};
use crate::hermitian::eig;
use crate::linalg::dot;
use crate::lp::{LinearProgram, LpOutcome};

const LINE_SEARCH_STEPS: usize = 60;
const GRADIENT_FLOOR: f64 = 1e-300;

/// Objective value and gradient in ambient coordinates.
fn value_and_gradient(objective: &Objective, model: &ModelSpace, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    match objective {
        Objective::Shannon => Ok((shannon_entropy(x), shannon_gradient(x))),
        Objective::VonNeumann => {
            let e = eig(&model.operator_of_coords(x)?)?;
            let value = shannon_entropy(&e.eigenvalues);
            let grad = e.map(|k| -(k.max(GRADIENT_FLOOR).ln() + 1.0));
            Ok((value, ModelSpace::operator_coords(&grad)))
        }
        Objective::FiducialMeasurementEntropy(ms) => Ok((fiducial_value(ms, x), fiducial_gradient(ms, x))),
        Objective::Custom(c) => Ok((c.value(x), c.gradient(x))),
    }
}

/// Mixing weights `w ≥ 0`, `Σw = 1`, with the region's equalities imposed on
/// `Σ wⱼ gⱼ`.
struct WeightPolytope {
    generators: Vec<Vec<f64>>,
    lp: LinearProgram,
}

impl WeightPolytope {
    fn new(generators: Vec<Vec<f64>>, problem: &MaxEntProblem) -> Self {
        let n = generators.len();
        let constraints = problem.region.constraints();
        let rows = 1 + constraints.len();
        let mut a = vec![1.0; n];
        let mut b = vec![1.0];
        for c in constraints {
            a.extend(generators.iter().map(|g| dot(c.functional(), g)));
            b.push(c.target());
        }
        Self {
            lp: LinearProgram::new(rows, n, a, b),
            generators,
        }
    }

    fn n(&self) -> usize {
        self.generators.len()
    }

    /// A vertex maximizing `score·w`.
    fn best_vertex(&self, score: &[f64], tol: f64) -> Option<Vec<f64>> {
        let cost: Vec<f64> = score.iter().map(|s| -s).collect();
        match self.lp.minimize(&cost, tol) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

/// One vertex of the weight polytope in the current convex combination.
struct Atom {
    weights: Vec<f64>,
    point: Vec<f64>,
    alpha: f64,
}

/// Frank-Wolfe with away steps over mixing weights of the model's vertices
/// (or of the region's generators), with an exact line search on the
/// concave objective.
///
/// The linear subproblem is an LP over the weights. The duality gap
/// `∇f(x)·(s − x)` bounds the suboptimality and stops the iteration.
pub fn solve_polytope(problem: &MaxEntProblem) -> Result<MaxEntSolution> {
    let tol = problem.tolerances;
    let model = problem.model().clone();
    let generators: Vec<Vec<f64>> = match (problem.region.generators(), model.vertices()) {
        (Some(gens), _) => gens.iter().map(|g| g.coords().to_vec()).collect(),
        (None, Some(v)) => v,
        (None, None) => {
            return Err(Error::UnsupportedRepresentation(
                "Frank-Wolfe needs a polyhedral model or a region with generators".into(),
            ))
        }
    };
    let infeasible = |iterations| -> Result<MaxEntSolution> {
        let state = State::maximally_mixed(model.clone());
        let (entropy, _) = value_and_gradient(&problem.objective, &model, state.coords())?;
        Ok(MaxEntSolution {
            residuals: residuals(&problem.region, &state),
            state,
            multipliers: Vec::new(),
            lambda0: None,
            entropy,
            iterations,
            status: SolveStatus::Infeasible,
        })
    };
    if problem.region.is_contradictory() || generators.is_empty() {
        return infeasible(0);
    }
    let polytope = WeightPolytope::new(generators, problem);
    let lp_tol = tol.region;

    // Start from the average of the vertices maximizing each weight, which
    // lies in the relative interior of the feasible weights.
    let mut atoms: Vec<Atom> = Vec::new();
    for j in 0..polytope.n() {
        let mut score = vec![0.0; polytope.n()];
        score[j] = 1.0;
        let Some(w) = polytope.best_vertex(&score, lp_tol) else {
            return infeasible(0);
        };
        add_atom(&mut atoms, &polytope, w, 1.0);
    }
    let total: f64 = atoms.iter().map(|a| a.alpha).sum();
    atoms.iter_mut().for_each(|a| a.alpha /= total);

    let mut x = current_point(&atoms);
    let mut status = SolveStatus::NonConvergence;
    let mut iterations = 0;
    while iterations < tol.fw_max_iter {
        let (_, grad) = value_and_gradient(&problem.objective, &model, &x)?;
        let score: Vec<f64> = polytope.generators.iter().map(|g| dot(&grad, g)).collect();
        let Some(s) = polytope.best_vertex(&score, lp_tol) else {
            return Err(Error::Unsupported(
                "linear subproblem failed on a feasible polytope".into(),
            ));
        };
        let s_point = combine(&polytope.generators, &s);
        let gx = dot(&grad, &x);
        let fw_gap = dot(&grad, &s_point) - gx;
        if fw_gap <= tol.fw_gap {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;

        let (away, away_gap) = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, gx - dot(&grad, &a.point)))
            .fold(
                (0, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );

        if fw_gap >= away_gap || atoms.len() == 1 {
            let d: Vec<f64> = s_point.iter().zip(&x).map(|(a, b)| a - b).collect();
            let gamma = line_search(problem, &model, &x, &d, 1.0)?;
            atoms.iter_mut().for_each(|a| a.alpha *= 1.0 - gamma);
            add_atom(&mut atoms, &polytope, s, gamma);
        } else {
            let alpha = atoms[away].alpha;
            let max_gamma = alpha / (1.0 - alpha);
            let d: Vec<f64> = x.iter().zip(&atoms[away].point).map(|(a, b)| a - b).collect();
            let gamma = line_search(problem, &model, &x, &d, max_gamma)?;
            atoms.iter_mut().for_each(|a| a.alpha *= 1.0 + gamma);
            atoms[away].alpha -= gamma;
            if gamma >= max_gamma {
                atoms.remove(away);
            }
        }
        atoms.retain(|a| a.alpha > 0.0);
        x = current_point(&atoms);
    }

    if status == SolveStatus::Converged
        && matches!(problem.objective, Objective::Shannon)
        && x.iter().any(|&p| p <= tol.boundary_eigenvalue)
    {
        status = SolveStatus::BoundaryOnly;
    }
    if status == SolveStatus::NonConvergence {
        log::warn!("Frank-Wolfe stopped after {iterations} iterations");
    }
    let state = State::trusted(model.clone(), x);
    let (entropy, _) = value_and_gradient(&problem.objective, &model, state.coords())?;
    Ok(MaxEntSolution {
        residuals: residuals(&problem.region, &state),
        state,
        multipliers: Vec::new(),
        lambda0: None,
        entropy,
        iterations,
        status,
    })
}

fn add_atom(atoms: &mut Vec<Atom>, polytope: &WeightPolytope, weights: Vec<f64>, alpha: f64) {
    if let Some(existing) = atoms.iter_mut().find(|a| max_diff(&a.weights, &weights) < 1e-12) {
        existing.alpha += alpha;
        return;
    }
    let point = combine(&polytope.generators, &weights);
    atoms.push(Atom { weights, point, alpha });
}

fn current_point(atoms: &[Atom]) -> Vec<f64> {
    let points: Vec<Vec<f64>> = atoms.iter().map(|a| a.point.clone()).collect();
    let alphas: Vec<f64> = atoms.iter().map(|a| a.alpha).collect();
    combine(&points, &alphas)
}

/// Maximizes the concave objective along `x + γ·d`, `γ ∈ [0, max]`, by
/// bisection on the sign of the directional derivative.
fn line_search(problem: &MaxEntProblem, model: &ModelSpace, x: &[f64], d: &[f64], max: f64) -> Result<f64> {
    let slope = |gamma: f64| -> Result<f64> {
        let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + gamma * b).collect();
        let (_, g) = value_and_gradient(&problem.objective, model, &p)?;
        Ok(dot(&g, d))
    };
    if slope(max)? >= 0.0 {
        return Ok(max);
    }
    let (mut lo, mut hi) = (0.0, max);
    for _ in 0..LINE_SEARCH_STEPS {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
