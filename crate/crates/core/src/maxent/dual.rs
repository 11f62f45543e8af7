use num_complex::Complex64;

use super::{entropy, residuals, MaxEntProblem, MaxEntSolution, Objective, SolveStatus};
use crate::com::{ModelSpace, State};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::{eig_with, exp_divided_difference, HermitianMatrix};
use crate::lattice::{feasibility, Feasibility, LinearConstraint};
use crate::linalg::{dot, norm_inf, reduce_rows, solve};

/// Largest change of any multiplier in one Newton step.
const MAX_STEP: f64 = 20.0;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Relative slack on the dual value below which it is not trusted to decide
/// anything (rounding in `ln Z` and `λ·r`).
const DUAL_ROUNDING: f64 = 1e-14;
/// Relative margin by which the dual must drop below zero to certify that
/// the constraints cannot be met.
const INFEASIBLE_MARGIN: f64 = 1e-9;
/// Residual accepted as converged when the line search can make no progress.
const STALL_RESIDUAL: f64 = 1e-8;

/// Sufficient statistics of an exponential family `exp(−Σ λᵢRᵢ)/Z`.
enum Family {
    Classical {
        dim: usize,
        functionals: Vec<Vec<f64>>,
    },
    Quantum {
        dim: usize,
        operators: Vec<HermitianMatrix>,
    },
}

/// The family evaluated at one multiplier vector.
struct Evaluation {
    ln_z: f64,
    means: Vec<f64>,
    /// `∂² ln Z/∂λᵢ∂λⱼ` row-major; empty when not requested.
    hessian: Vec<f64>,
    coords: Vec<f64>,
    /// Smallest probability or eigenvalue of the normalized state.
    min_weight: f64,
}

impl Family {
    fn new(model: &ModelSpace, functionals: Vec<Vec<f64>>) -> Result<Self> {
        match model {
            ModelSpace::Classical { dim } => Ok(Family::Classical { dim: *dim, functionals }),
            ModelSpace::Quantum { dim } => Ok(Family::Quantum {
                dim: *dim,
                operators: functionals
                    .iter()
                    .map(|f| ModelSpace::operator_from_coords(*dim, f))
                    .collect::<Result<_>>()?,
            }),
            ModelSpace::Polytope(_) => Err(Error::IncompatibleObjective(
                "exponential-family dual needs a classical or quantum model".into(),
            )),
        }
    }

    fn len(&self) -> usize {
        match self {
            Family::Classical { functionals, .. } => functionals.len(),
            Family::Quantum { operators, .. } => operators.len(),
        }
    }

    fn evaluate(&self, lambdas: &[f64], with_hessian: bool, tol: &Tolerances) -> Result<Evaluation> {
        if lambdas.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: lambdas.len(),
            });
        }
        if lambdas.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateInput("non-finite multiplier"));
        }
        match self {
            Family::Classical { dim, functionals } => Ok(classical(*dim, functionals, lambdas, with_hessian)),
            Family::Quantum { dim, operators } => quantum(*dim, operators, lambdas, with_hessian, tol),
        }
    }
}

fn classical(n: usize, functionals: &[Vec<f64>], lambdas: &[f64], with_hessian: bool) -> Evaluation {
    let m = functionals.len();
    let mut exponent = vec![0.0; n];
    for (f, &l) in functionals.iter().zip(lambdas) {
        for (e, x) in exponent.iter_mut().zip(f) {
            *e -= l * x;
        }
    }
    let shift = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = exponent.iter().map(|a| (a - shift).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    let means: Vec<f64> = functionals.iter().map(|f| dot(f, &p)).collect();
    let mut hessian = Vec::new();
    if with_hessian {
        hessian = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let second: f64 = (0..n).map(|k| p[k] * functionals[i][k] * functionals[j][k]).sum();
                let c = second - means[i] * means[j];
                hessian[i * m + j] = c;
                hessian[j * m + i] = c;
            }
        }
    }
    let min_weight = p.iter().copied().fold(f64::INFINITY, f64::min);
    Evaluation {
        ln_z: shift + z.ln(),
        means,
        hessian,
        coords: p,
        min_weight,
    }
}

fn quantum(
    dim: usize,
    operators: &[HermitianMatrix],
    lambdas: &[f64],
    with_hessian: bool,
    tol: &Tolerances,
) -> Result<Evaluation> {
    let m = operators.len();
    let mut generator = HermitianMatrix::zeros(dim);
    for (r, &l) in operators.iter().zip(lambdas) {
        generator = &generator - &r.scale(l);
    }
    let e = eig_with(&generator, tol)?;
    let shift = e.eigenvalues[dim - 1];
    let shifted: Vec<f64> = e.eigenvalues.iter().map(|k| k - shift).collect();
    let weights: Vec<f64> = shifted.iter().map(|k| k.exp()).collect();
    let z: f64 = weights.iter().sum();
    let p: Vec<f64> = weights.iter().map(|w| w / z).collect();

    let rotated: Vec<Vec<Complex64>> = operators.iter().map(|r| e.to_eigenbasis(r)).collect();
    let means: Vec<f64> = rotated
        .iter()
        .map(|r| (0..dim).map(|a| p[a] * r[a * dim + a].re).sum())
        .collect();

    let mut hessian = Vec::new();
    if with_hessian {
        // Kubo-Mori inner product: tr(Rᵢ · D exp(M)[Rⱼ]) / Z − ⟨Rᵢ⟩⟨Rⱼ⟩,
        // written in the eigenbasis of M with divided differences of exp.
        let mut phi = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                phi[a * dim + b] = exp_divided_difference(shifted[a], shifted[b], tol.divided_difference) / z;
            }
        }
        hessian = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for a in 0..dim {
                    for b in 0..dim {
                        acc += (rotated[i][b * dim + a] * rotated[j][a * dim + b]).re * phi[a * dim + b];
                    }
                }
                let c = acc - means[i] * means[j];
                hessian[i * m + j] = c;
                hessian[j * m + i] = c;
            }
        }
    }
    let rho = e.map(|k| (k - shift).exp() / z);
    Ok(Evaluation {
        ln_z: shift + z.ln(),
        means,
        hessian,
        coords: ModelSpace::operator_coords(&rho),
        min_weight: p[0],
    })
}

fn family_of(model: &ModelSpace, constraints: &[LinearConstraint]) -> Result<Family> {
    if constraints.iter().any(|c| **c.model() != *model) {
        return Err(Error::ModelMismatch);
    }
    Family::new(model, constraints.iter().map(|c| c.functional().to_vec()).collect())
}

/// `(Z, ln Z)` for `Z(λ) = tr exp(−Σ λᵢRᵢ)` (or `Σₓ exp(−Σ λᵢfᵢ(x))`
/// classically). `Z` overflows to infinity before `ln Z` does.
pub fn partition_function(model: &ModelSpace, constraints: &[LinearConstraint], lambdas: &[f64]) -> Result<(f64, f64)> {
    let tol = Tolerances::default();
    let ev = family_of(model, constraints)?.evaluate(lambdas, false, &tol)?;
    Ok((ev.ln_z.exp(), ev.ln_z))
}

/// Gradient of the dual `D(λ) = ln Z(λ) + Σ λᵢrᵢ`, i.e. `rᵢ − ⟨Rᵢ⟩_λ`.
pub fn dual_gradient(model: &ModelSpace, constraints: &[LinearConstraint], lambdas: &[f64]) -> Result<Vec<f64>> {
    let tol = Tolerances::default();
    let ev = family_of(model, constraints)?.evaluate(lambdas, false, &tol)?;
    Ok(constraints.iter().zip(&ev.means).map(|(c, m)| c.target() - m).collect())
}

/// Hessian of the dual, row-major `m × m`: the covariance of the
/// constraint functions, or their Kubo-Mori inner product for quantum models.
pub fn dual_hessian(model: &ModelSpace, constraints: &[LinearConstraint], lambdas: &[f64]) -> Result<Vec<f64>> {
    let tol = Tolerances::default();
    Ok(family_of(model, constraints)?.evaluate(lambdas, true, &tol)?.hessian)
}

/// One iterate of the Newton solver, for inspection.
#[derive(Debug, Clone)]
pub struct NewtonStep {
    pub iteration: usize,
    /// Multipliers of the independent constraints actually solved for.
    pub multipliers: Vec<f64>,
    pub dual_value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

/// Damped Newton on the dual. See [`solve_dual_observed`].
pub fn solve_dual(problem: &MaxEntProblem) -> Result<MaxEntSolution> {
    solve_dual_observed(problem, &mut |_| {})
}

/// Damped Newton on the convex dual with backtracking, falling back to
/// gradient descent when the Newton direction cannot make progress.
///
/// Constraints that are linearly dependent on the others (and on
/// normalization) are dropped with a warning; dependent constraints with a
/// conflicting target make the problem infeasible. Emptiness is certified
/// either by the phase-I LP (classical) or by the dual falling below zero,
/// which weak duality forbids for a non-empty region. When the multipliers
/// run off to infinity with the residual vanishing, the supremum sits on the
/// boundary and the status is [`SolveStatus::BoundaryOnly`].
pub fn solve_dual_observed(problem: &MaxEntProblem, observer: &mut dyn FnMut(&NewtonStep)) -> Result<MaxEntSolution> {
    if !matches!(problem.objective, Objective::Shannon | Objective::VonNeumann) {
        return Err(Error::IncompatibleObjective(format!(
            "{:?} has no exponential-family dual",
            problem.objective
        )));
    }
    if problem.region.generators().is_some() {
        return Err(Error::UnsupportedRepresentation(
            "the dual solver needs a region given by equalities only".into(),
        ));
    }
    let tol = problem.tolerances;
    let model = problem.model().clone();
    let all = problem.region.constraints();

    let infeasible = |state: State, iterations| {
        let residuals = residuals(&problem.region, &state);
        let entropy = entropy(&problem.objective, &state)?;
        Ok(MaxEntSolution {
            state,
            multipliers: vec![0.0; all.len()],
            lambda0: None,
            entropy,
            iterations,
            residuals,
            status: SolveStatus::Infeasible,
        })
    };

    if problem.region.is_contradictory() {
        return infeasible(State::maximally_mixed(model), 0);
    }
    let mut rows = vec![model.unit_functional()];
    let mut rhs = vec![1.0];
    for c in all {
        rows.push(c.functional().to_vec());
        rhs.push(c.target());
    }
    let reduction = reduce_rows(&rows, &rhs, tol.pivot, INFEASIBLE_MARGIN);
    if !reduction.is_consistent() {
        return infeasible(State::maximally_mixed(model), 0);
    }
    for &k in &reduction.redundant {
        log::warn!("constraint {} is implied by the others; dropped", k - 1);
    }
    if model.is_polyhedral() && matches!(feasibility(&problem.region), Feasibility::Infeasible) {
        return infeasible(State::maximally_mixed(model), 0);
    }
    let kept: Vec<usize> = reduction
        .independent
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| k - 1)
        .collect();
    let family = Family::new(&model, kept.iter().map(|&k| all[k].functional().to_vec()).collect())?;
    let targets: Vec<f64> = kept.iter().map(|&k| all[k].target()).collect();
    let m = kept.len();

    let dual = |lam: &[f64], ev: &Evaluation| ev.ln_z + dot(lam, &targets);
    let rounding = |lam: &[f64], ev: &Evaluation| {
        1.0 + ev.ln_z.abs() + lam.iter().zip(&targets).map(|(l, r)| (l * r).abs()).sum::<f64>()
    };
    let gradient = |ev: &Evaluation| -> Vec<f64> { targets.iter().zip(&ev.means).map(|(r, x)| r - x).collect() };

    let mut lam = vec![0.0; m];
    let mut ev = family.evaluate(&lam, true, &tol)?;
    let mut value = dual(&lam, &ev);
    let mut status = SolveStatus::NonConvergence;
    let mut iterations = 0;

    while iterations < tol.dual_max_iter {
        let g = gradient(&ev);
        let gnorm = norm_inf(&g);
        observer(&NewtonStep {
            iteration: iterations,
            multipliers: lam.clone(),
            dual_value: value,
            gradient: g.clone(),
            hessian: ev.hessian.clone(),
        });
        if value < -INFEASIBLE_MARGIN * rounding(&lam, &ev) {
            status = SolveStatus::Infeasible;
            break;
        }
        if gnorm <= tol.dual_gradient {
            status = settled(&ev, &tol);
            break;
        }
        if norm_inf(&lam) > tol.multiplier_bound {
            status = SolveStatus::BoundaryOnly;
            break;
        }
        iterations += 1;

        let newton = newton_direction(&ev.hessian, &g, m, tol.hessian_ridge);
        let mut accepted = None;
        for direction in newton
            .into_iter()
            .chain(std::iter::once(g.iter().map(|x| -x).collect()))
        {
            let slope = dot(&g, &direction);
            if slope >= 0.0 {
                continue;
            }
            let step_norm = norm_inf(&direction);
            let mut t = if step_norm > MAX_STEP {
                MAX_STEP / step_norm
            } else {
                1.0
            };
            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = lam.iter().zip(&direction).map(|(l, d)| l + t * d).collect();
                if let Ok(tev) = family.evaluate(&trial, true, &tol) {
                    let tvalue = dual(&trial, &tev);
                    let sufficient = tvalue <= value + ARMIJO * t * slope;
                    let flat =
                        tvalue <= value + DUAL_ROUNDING * rounding(&lam, &ev) && norm_inf(&gradient(&tev)) < gnorm;
                    if sufficient || flat {
                        accepted = Some((trial, tev, tvalue));
                        break;
                    }
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((l, e, v)) => {
                lam = l;
                ev = e;
                value = v;
            }
            None => {
                log::debug!("line search stalled at residual {gnorm:e}");
                if gnorm <= STALL_RESIDUAL {
                    status = settled(&ev, &tol);
                }
                break;
            }
        }
    }
    if status == SolveStatus::NonConvergence {
        log::warn!("dual solver stopped after {iterations} iterations");
    }

    let state = State::trusted(model, ev.coords.clone());
    let mut multipliers = vec![0.0; all.len()];
    for (&k, &l) in kept.iter().zip(&lam) {
        multipliers[k] = l;
    }
    Ok(MaxEntSolution {
        residuals: residuals(&problem.region, &state),
        entropy: entropy(&problem.objective, &state)?,
        state,
        multipliers,
        lambda0: Some(ev.ln_z),
        iterations,
        status,
    })
}

fn settled(ev: &Evaluation, tol: &Tolerances) -> SolveStatus {
    if ev.min_weight <= tol.boundary_eigenvalue {
        SolveStatus::BoundaryOnly
    } else {
        SolveStatus::Converged
    }
}

/// Solves `(H + εI)·d = −g`, with `ε` scaled to the Hessian's diagonal.
fn newton_direction(hessian: &[f64], g: &[f64], m: usize, ridge: f64) -> Option<Vec<f64>> {
    let scale = (0..m).map(|i| hessian[i * m + i].abs()).fold(0.0, f64::max);
    let mut a = hessian.to_vec();
    for i in 0..m {
        a[i * m + i] += ridge * (1.0 + scale);
    }
    let minus_g: Vec<f64> = g.iter().map(|x| -x).collect();
    solve(m, &a, &minus_g).filter(|d| d.iter().all(|x| x.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::com::{Effect, Observable};
    use crate::lattice::{region_from_effect, region_from_mean, ConvexRegion};
    use crate::maxent::binary_entropy;

    fn quantum_problem(region: ConvexRegion) -> MaxEntProblem {
        MaxEntProblem::new(region, Objective::VonNeumann).unwrap()
    }

    fn z_obs() -> Observable {
        Observable::spectral(ModelSpace::quantum(2).unwrap(), &HermitianMatrix::pauli_z()).unwrap()
    }

    #[test]
    fn gibbs_qubit() {
        let q = ModelSpace::quantum(2).unwrap();
        let obs = Observable::spectral(q, &HermitianMatrix::diagonal(&[0.0, 1.0])).unwrap();
        let sol = solve_dual(&quantum_problem(region_from_mean(&obs, 0.3).unwrap())).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        let rho = sol.state.density_matrix().unwrap();
        assert!(rho.max_abs_diff(&HermitianMatrix::diagonal(&[0.7, 0.3])) < 1e-8);
        assert!((sol.entropy - 0.610864).abs() < 1e-6);
        assert!((sol.multipliers[0] - (7.0f64 / 3.0).ln()).abs() < 1e-8);
        assert!(sol.max_residual() < 1e-10);
    }

    #[test]
    fn effect_constraint_qubit() {
        let q = ModelSpace::quantum(2).unwrap();
        let e = Effect::from_operator(q, &HermitianMatrix::diagonal(&[0.3, 0.7])).unwrap();
        let sol = solve_dual(&quantum_problem(region_from_effect(&e, 0.65).unwrap())).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        let rho = sol.state.density_matrix().unwrap();
        assert!(rho.max_abs_diff(&HermitianMatrix::diagonal(&[0.125, 0.875])) < 1e-8);
        assert!((sol.entropy - binary_entropy(0.125)).abs() < 1e-8);
        assert!((sol.entropy - 0.376770).abs() < 1e-6);
    }

    #[test]
    fn unconstrained_is_maximally_mixed() {
        let q = ModelSpace::quantum(3).unwrap();
        let sol = solve_dual(&quantum_problem(ConvexRegion::whole(q))).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!((sol.entropy - 3f64.ln()).abs() < 1e-12);
        assert!((sol.lambda0.unwrap() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn partition_function_examples() {
        let q = ModelSpace::quantum(2).unwrap();
        let z = region_from_mean(&z_obs(), 0.0).unwrap();
        let (zz, ln_z) = partition_function(&q, z.constraints(), &[0.0]).unwrap();
        assert!((zz - 2.0).abs() < 1e-14);
        assert!((ln_z - 2f64.ln()).abs() < 1e-14);

        let lam = [(7.0f64 / 3.0).ln()];
        let h = Observable::spectral(q.clone(), &HermitianMatrix::diagonal(&[0.0, 1.0])).unwrap();
        let region = region_from_mean(&h, 0.3).unwrap();
        let (zz, _) = partition_function(&q, region.constraints(), &lam).unwrap();
        assert!((zz - 10.0 / 7.0).abs() < 1e-13);

        let c = ModelSpace::classical(2).unwrap();
        let bit = Observable::from_functionals(
            c.clone(),
            vec![
                ("0".into(), vec![1.0, 0.0], Some(0.0)),
                ("1".into(), vec![0.0, 1.0], Some(1.0)),
            ],
        )
        .unwrap();
        let region = region_from_mean(&bit, 0.3).unwrap();
        let (zz, _) = partition_function(&c, region.constraints(), &lam).unwrap();
        assert!((zz - 10.0 / 7.0).abs() < 1e-13);
        assert!(partition_function(&c, region.constraints(), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let q = ModelSpace::quantum(2).unwrap();
        let z = region_from_mean(&z_obs(), 0.0).unwrap();
        assert!(dual_gradient(&q, z.constraints(), &[0.0]).unwrap()[0].abs() < 1e-15);
        let h = Observable::spectral(q.clone(), &HermitianMatrix::diagonal(&[0.0, 1.0])).unwrap();
        let region = region_from_mean(&h, 0.3).unwrap();
        let g = dual_gradient(&q, region.constraints(), &[0.0]).unwrap();
        assert!((g[0] + 0.2).abs() < 1e-15);
        let sol = solve_dual(&quantum_problem(region.clone())).unwrap();
        let g = dual_gradient(&q, region.constraints(), &sol.multipliers).unwrap();
        assert!(g[0].abs() <= 1e-10);
    }

    #[test]
    fn boundary_target() {
        let sol = solve_dual(&quantum_problem(region_from_mean(&z_obs(), 1.0).unwrap())).unwrap();
        assert_eq!(sol.status, SolveStatus::BoundaryOnly);
        let rho = sol.state.density_matrix().unwrap();
        assert!(rho.max_abs_diff(&HermitianMatrix::diagonal(&[1.0, 0.0])) < 1e-3);
        assert!(sol.entropy < 1e-3);
    }

    #[test]
    fn out_of_range_target_is_infeasible() {
        let sol = solve_dual(&quantum_problem(region_from_mean(&z_obs(), 1.5).unwrap())).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn classical_three_level() {
        let c = ModelSpace::classical(3).unwrap();
        let obs = Observable::from_functionals(
            c,
            vec![
                ("a".into(), vec![1.0, 0.0, 0.0], Some(0.0)),
                ("b".into(), vec![0.0, 1.0, 0.0], Some(1.0)),
                ("c".into(), vec![0.0, 0.0, 1.0], Some(2.0)),
            ],
        )
        .unwrap();
        let problem = MaxEntProblem::new(region_from_mean(&obs, 1.0).unwrap(), Objective::Shannon).unwrap();
        let sol = solve_dual(&problem).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        for p in sol.state.coords() {
            assert!((p - 1.0 / 3.0).abs() < 1e-10);
        }
        assert!(sol.multipliers[0].abs() < 1e-10);
    }

    #[test]
    fn redundant_constraint_is_dropped() {
        let a = region_from_mean(&z_obs(), 0.2).unwrap();
        let q = ModelSpace::quantum(2).unwrap();
        let doubled = Observable::spectral(q, &HermitianMatrix::pauli_z().scale(2.0)).unwrap();
        let b = region_from_mean(&doubled, 0.4).unwrap();
        let both = crate::lattice::meet(&a, &b).unwrap();
        assert_eq!(both.constraints().len(), 1);
        let sol = solve_dual(&quantum_problem(both)).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let q = ModelSpace::quantum(2).unwrap();
        let region = crate::lattice::meet(
            &region_from_mean(&z_obs(), 0.2).unwrap(),
            &region_from_mean(
                &Observable::spectral(q.clone(), &HermitianMatrix::pauli_x()).unwrap(),
                -0.3,
            )
            .unwrap(),
        )
        .unwrap();
        let cs = region.constraints();
        let lam = [0.4, -0.7];
        let g = dual_gradient(&q, cs, &lam).unwrap();
        let d = |l: &[f64]| partition_function(&q, cs, l).unwrap().1 + l[0] * 0.2 + l[1] * -0.3;
        let h = 1e-6;
        for i in 0..2 {
            let mut up = lam;
            let mut dn = lam;
            up[i] += h;
            dn[i] -= h;
            let fd = (d(&up) - d(&dn)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8, "{fd} vs {}", g[i]);
        }
        let hess = dual_hessian(&q, cs, &lam).unwrap();
        for i in 0..2 {
            let mut up = lam;
            let mut dn = lam;
            up[i] += h;
            dn[i] -= h;
            let gu = dual_gradient(&q, cs, &up).unwrap();
            let gd = dual_gradient(&q, cs, &dn).unwrap();
            for j in 0..2 {
                let fd = (gu[j] - gd[j]) / (2.0 * h);
                assert!((fd - hess[j * 2 + i]).abs() < 1e-7);
            }
        }
    }
}
