//! Constraint regions `C = S ∩ Ω` and their lattice operations.
//!
//! A condition `⟨R⟩ = r` (or `F_x(ω) = λ` for an effect) is the kernel of the
//! affine functional `ω ↦ R(ω) − r·u(ω)` intersected with the state space. A
//! [`ConvexRegion`] keeps a list of such equalities (its H-representation)
//! and, when known, a finite list of generating states (its V-representation).
//!
//! When a V-representation is present the region is exactly the convex hull
//! of its generators; the stored equalities are then satisfied by every
//! generator. Without one, the region is `Ω` cut by the equalities.
//!
//! Meet is intersection, join is convex hull, order is inclusion. Hulls and
//! vertex enumeration are exact for polyhedral models; quantum regions need
//! caller-supplied generators for join and inclusion.

use std::sync::Arc;

use crate::com::{max_diff, mixing_weights, Effect, ModelSpace, Observable, State};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, norm_inf, reduce_rows, solve};
use crate::lp::{LinearProgram, LpOutcome};
use crate::maxent::{solve_dual, MaxEntProblem, Objective, SolveStatus};

/// Whether a constraint came from a mean value or from an effect probability.
/// Informational only: both kinds are handled identically everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOrigin {
    Mean,
    Probability,
    Functional,
}

/// The affine condition `functional(ω) = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    model: Arc<ModelSpace>,
    functional: Vec<f64>,
    target: f64,
    origin: ConstraintOrigin,
}

impl LinearConstraint {
    pub fn new(model: Arc<ModelSpace>, functional: Vec<f64>, target: f64) -> Result<Self> {
        Self::with_origin(model, functional, target, ConstraintOrigin::Functional)
    }

    fn with_origin(
        model: Arc<ModelSpace>,
        functional: Vec<f64>,
        target: f64,
        origin: ConstraintOrigin,
    ) -> Result<Self> {
        model.check_len(&functional)?;
        if functional.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateInput("constraint functional is zero"));
        }
        if !target.is_finite() || functional.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateInput("constraint is not finite"));
        }
        Ok(Self {
            model,
            functional,
            target,
            origin,
        })
    }

    /// `⟨F⟩ = r` with the functional `Σᵢ valueᵢ·Fᵢ`.
    pub fn from_mean(obs: &Observable, r: f64) -> Result<Self> {
        let f = obs.mean_functional()?;
        Self::with_origin(obs.model().clone(), f, r, ConstraintOrigin::Mean)
    }

    /// `e(ω) = λ` with `λ ∈ [0, 1]`.
    pub fn from_effect(e: &Effect, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidTarget(lambda));
        }
        Self::with_origin(
            e.model().clone(),
            e.functional().to_vec(),
            lambda,
            ConstraintOrigin::Probability,
        )
    }

    pub fn model(&self) -> &Arc<ModelSpace> {
        &self.model
    }

    pub fn functional(&self) -> &[f64] {
        &self.functional
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn origin(&self) -> ConstraintOrigin {
        self.origin
    }

    /// The kernel functional `a ↦ f(a) − r·u(a)`.
    pub fn kernel_functional(&self) -> Vec<f64> {
        self.functional
            .iter()
            .zip(self.model.unit_functional())
            .map(|(f, u)| f - self.target * u)
            .collect()
    }

    /// `|f(ω) − r|`.
    pub fn residual(&self, s: &State) -> f64 {
        (dot(&self.functional, s.coords()) - self.target).abs()
    }

    fn normalized(&self) -> (Vec<f64>, f64) {
        let n = norm(&self.functional);
        (self.functional.iter().map(|x| x / n).collect(), self.target / n)
    }
}

/// A convex subset of a model's state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRegion {
    model: Arc<ModelSpace>,
    h_rep: Vec<LinearConstraint>,
    v_rep: Option<Vec<State>>,
    contradictory: bool,
}

/// Result of a feasibility query.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(State),
    Infeasible,
    /// The region is only reachable as a limit of exponential-family states
    /// (targets on the boundary of the achievable set). Carries the limiting
    /// state found.
    BoundaryOnly(State),
}

impl ConvexRegion {
    /// The whole state space `Ω` (top of the lattice).
    pub fn whole(model: Arc<ModelSpace>) -> Self {
        Self {
            model,
            h_rep: Vec::new(),
            v_rep: None,
            contradictory: false,
        }
    }

    /// `Ω` cut by the given equalities, with duplicates removed.
    pub fn from_constraints(model: Arc<ModelSpace>, constraints: Vec<LinearConstraint>) -> Result<Self> {
        let mut region = Self::whole(model);
        for c in constraints {
            if **c.model() != *region.model {
                return Err(Error::ModelMismatch);
            }
            region.push_constraint(c, &Tolerances::default());
        }
        Ok(region)
    }

    /// The convex hull of finitely many states.
    pub fn from_generators(model: Arc<ModelSpace>, generators: Vec<State>) -> Result<Self> {
        if generators.iter().any(|g| **g.model() != *model) {
            return Err(Error::ModelMismatch);
        }
        Ok(Self {
            model,
            h_rep: Vec::new(),
            v_rep: Some(dedup_states(generators, Tolerances::default().region)),
            contradictory: false,
        })
    }

    pub fn model(&self) -> &Arc<ModelSpace> {
        &self.model
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.h_rep
    }

    pub fn generators(&self) -> Option<&[State]> {
        self.v_rep.as_deref()
    }

    /// Set when two parallel constraints demand different targets.
    pub fn is_contradictory(&self) -> bool {
        self.contradictory
    }

    /// Appends a constraint unless a positive multiple of it is already
    /// present. Returns whether it was a duplicate.
    fn push_constraint(&mut self, c: LinearConstraint, tol: &Tolerances) -> bool {
        let (f, r) = c.normalized();
        for existing in &self.h_rep {
            let (g, s) = existing.normalized();
            let diff = f.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if diff <= tol.duplicate_functional {
                if (r - s).abs() > tol.duplicate_functional * (1.0 + r.abs()) {
                    self.contradictory = true;
                    // still record it so reports show the conflict
                    self.h_rep.push(c);
                    return false;
                }
                return true;
            }
        }
        self.h_rep.push(c);
        false
    }

    /// Membership of a state: every equality within `1e-8` and, with a
    /// V-representation, inside the generators' hull.
    pub fn contains(&self, s: &State) -> Result<bool> {
        if **s.model() != *self.model {
            return Err(Error::ModelMismatch);
        }
        let tol = Tolerances::default();
        if self.contradictory {
            return Ok(false);
        }
        if self.h_rep.iter().any(|c| c.residual(s) > tol.region) {
            return Ok(false);
        }
        Ok(match &self.v_rep {
            None => true,
            Some(gens) if gens.is_empty() => false,
            Some(gens) => {
                let coords: Vec<Vec<f64>> = gens.iter().map(|g| g.coords().to_vec()).collect();
                mixing_weights(&coords, s.coords(), tol.region).is_some()
            }
        })
    }

    /// Extreme points of the region.
    pub fn vertices(&self) -> Result<Vec<State>> {
        enumerate_vertices(self)
    }
}

fn dedup_states(states: Vec<State>, tol: f64) -> Vec<State> {
    let mut out: Vec<State> = Vec::with_capacity(states.len());
    for s in states {
        if !out.iter().any(|t| t.distance(&s) < tol) {
            out.push(s);
        }
    }
    out
}

/// `{ω : ⟨F⟩_ω = r}`, stored as the functional `Σᵢ valueᵢ·Fᵢ` with target `r`.
pub fn region_from_mean(obs: &Observable, r: f64) -> Result<ConvexRegion> {
    let c = LinearConstraint::from_mean(obs, r)?;
    ConvexRegion::from_constraints(obs.model().clone(), vec![c])
}

/// `{ω : e(ω) = λ}`.
pub fn region_from_effect(e: &Effect, lambda: f64) -> Result<ConvexRegion> {
    let c = LinearConstraint::from_effect(e, lambda)?;
    ConvexRegion::from_constraints(e.model().clone(), vec![c])
}

/// Intersection. See [`meet_counted`] for the number of dropped duplicates.
pub fn meet(a: &ConvexRegion, b: &ConvexRegion) -> Result<ConvexRegion> {
    meet_counted(a, b).map(|(r, _)| r)
}

/// Intersection, also reporting how many of `b`'s constraints duplicated one
/// already present.
///
/// Constraint lists are concatenated. When either side carries generators the
/// hull of the intersection is recomputed, so the result is again exactly
/// described by its generators.
pub fn meet_counted(a: &ConvexRegion, b: &ConvexRegion) -> Result<(ConvexRegion, usize)> {
    if a.model != b.model {
        return Err(Error::ModelMismatch);
    }
    let tol = Tolerances::default();
    let mut out = a.clone();
    out.contradictory |= b.contradictory;
    let mut duplicates = 0;
    for c in &b.h_rep {
        if out.push_constraint(c.clone(), &tol) {
            duplicates += 1;
        }
    }
    let blocks: Vec<Vec<Vec<f64>>> = [&a.v_rep, &b.v_rep]
        .into_iter()
        .flatten()
        .map(|gens| gens.iter().map(|g| g.coords().to_vec()).collect())
        .collect();
    out.v_rep = if blocks.is_empty() {
        None
    } else if out.contradictory {
        Some(Vec::new())
    } else {
        let system = WeightSystem::new(blocks, &out.h_rep);
        Some(system.vertices(&out.model, &tol)?)
    };
    Ok((out, duplicates))
}

/// Convex hull of the union. Both regions must admit a V-representation.
pub fn join(a: &ConvexRegion, b: &ConvexRegion) -> Result<ConvexRegion> {
    if a.model != b.model {
        return Err(Error::ModelMismatch);
    }
    let mut gens = enumerate_vertices(a)?;
    gens.extend(enumerate_vertices(b)?);
    Ok(ConvexRegion {
        model: a.model.clone(),
        h_rep: Vec::new(),
        v_rep: Some(dedup_states(gens, Tolerances::default().region)),
        contradictory: false,
    })
}

/// `inner ⊆ outer`, decided on the vertices of `inner`.
pub fn includes(outer: &ConvexRegion, inner: &ConvexRegion) -> Result<bool> {
    if outer.model != inner.model {
        return Err(Error::ModelMismatch);
    }
    if outer.v_rep.is_none() && outer.h_rep.is_empty() && !outer.contradictory {
        return Ok(true);
    }
    let vertices = enumerate_vertices(inner)?;
    for v in &vertices {
        if !outer.contains(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Decides whether the region is empty.
///
/// Polyhedral regions and regions with generators go through a phase-I LP.
/// Quantum regions given only by equalities are probed with the dual MaxEnt
/// solver: a converged solve is a witness, a divergent dual with vanishing
/// residuals is `BoundaryOnly`, and an unbounded dual proves emptiness.
pub fn feasibility(c: &ConvexRegion) -> Feasibility {
    let tol = Tolerances::default();
    if c.contradictory {
        return Feasibility::Infeasible;
    }
    if let Some(gens) = &c.v_rep {
        if gens.is_empty() {
            return Feasibility::Infeasible;
        }
        let coords: Vec<Vec<f64>> = gens.iter().map(|g| g.coords().to_vec()).collect();
        let w = vec![1.0 / coords.len() as f64; coords.len()];
        return Feasibility::Feasible(State::trusted(c.model.clone(), crate::com::combine(&coords, &w)));
    }
    if let Some(vertices) = c.model.vertices() {
        let system = WeightSystem::new(vec![vertices], &c.h_rep);
        return match system.feasible_weights(tol.region) {
            Some(w) => Feasibility::Feasible(State::trusted(c.model.clone(), system.project(&w))),
            None => Feasibility::Infeasible,
        };
    }
    let problem = MaxEntProblem::new(c.clone(), Objective::VonNeumann);
    let solution = match problem.and_then(|p| solve_dual(&p)) {
        Ok(s) => s,
        Err(_) => return Feasibility::Infeasible,
    };
    let max_residual = norm_inf(&solution.residuals);
    match solution.status {
        SolveStatus::Converged => Feasibility::Feasible(solution.state),
        SolveStatus::BoundaryOnly => Feasibility::BoundaryOnly(solution.state),
        SolveStatus::Infeasible => Feasibility::Infeasible,
        SolveStatus::NonConvergence if max_residual <= 1e-6 => Feasibility::BoundaryOnly(solution.state),
        SolveStatus::NonConvergence => Feasibility::Infeasible,
    }
}

/// A region cut by `count` random equalities whose targets are read off a
/// random full-support state, which is returned alongside and lies in the
/// region's relative interior.
///
/// Quantum functionals are Gaussian Hermitian matrices, classical ones
/// Gaussian outcome values, polytope ones random effects.
pub fn random_feasible_region<R: rand::Rng + ?Sized>(
    model: &Arc<ModelSpace>,
    count: usize,
    rng: &mut R,
) -> (ConvexRegion, State) {
    use rand_distr::{Distribution, StandardNormal};
    let interior = crate::com::random::random_state(model, rng);
    let mut region = ConvexRegion::whole(model.clone());
    while region.h_rep.len() < count {
        let functional = match model.as_ref() {
            ModelSpace::Quantum { dim } => {
                ModelSpace::operator_coords(&crate::com::random::random_hermitian(*dim, 1.0, rng))
            }
            ModelSpace::Classical { dim } => (0..*dim).map(|_| StandardNormal.sample(rng)).collect(),
            ModelSpace::Polytope(_) => crate::com::random::random_effect(model, rng).functional().to_vec(),
        };
        let target = dot(&functional, interior.coords());
        if let Ok(c) = LinearConstraint::new(model.clone(), functional, target) {
            region.push_constraint(c, &Tolerances::default());
        }
    }
    (region, interior)
}

/// Exact vertex set of a polyhedral region or of a region with generators.
pub fn enumerate_vertices(c: &ConvexRegion) -> Result<Vec<State>> {
    let tol = Tolerances::default();
    if c.contradictory {
        return Ok(Vec::new());
    }
    if let Some(gens) = &c.v_rep {
        return Ok(gens.clone());
    }
    let Some(vertices) = c.model.vertices() else {
        return Err(Error::UnsupportedRepresentation(
            "vertices of a quantum region given by equalities cannot be enumerated; supply generators".into(),
        ));
    };
    if c.h_rep.len() + c.model.ambient_dim() > tol.enumeration_cap {
        return Err(Error::Unsupported(format!(
            "vertex enumeration capped at {} constraints plus ambient dimensions",
            tol.enumeration_cap
        )));
    }
    WeightSystem::new(vec![vertices], &c.h_rep).vertices(&c.model, &tol)
}

/// `{w ≥ 0 : A·w = b}` over mixing weights of one or more generator blocks.
///
/// Each block's weights sum to 1, every block describes the same point
/// (`G₀w₀ = Gₖwₖ`), and the point satisfies the equalities. The region is the
/// image `x = G₀w₀`.
struct WeightSystem {
    blocks: Vec<Vec<Vec<f64>>>,
    n: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl WeightSystem {
    fn new(blocks: Vec<Vec<Vec<f64>>>, constraints: &[LinearConstraint]) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut n = 0;
        for b in &blocks {
            offsets.push(n);
            n += b.len();
        }
        let dim = blocks.iter().flat_map(|b| b.first()).map(Vec::len).next().unwrap_or(0);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (k, b) in blocks.iter().enumerate() {
            let mut row = vec![0.0; n];
            row[offsets[k]..offsets[k] + b.len()].iter_mut().for_each(|x| *x = 1.0);
            rows.push(row);
            rhs.push(1.0);
        }
        for k in 1..blocks.len() {
            for i in 0..dim {
                let mut row = vec![0.0; n];
                for (j, g) in blocks[0].iter().enumerate() {
                    row[j] = g[i];
                }
                for (j, g) in blocks[k].iter().enumerate() {
                    row[offsets[k] + j] = -g[i];
                }
                rows.push(row);
                rhs.push(0.0);
            }
        }
        if let Some(first) = blocks.first() {
            for c in constraints {
                let mut row = vec![0.0; n];
                for (j, g) in first.iter().enumerate() {
                    row[j] = dot(c.functional(), g);
                }
                rows.push(row);
                rhs.push(c.target());
            }
        }
        Self { blocks, n, rows, rhs }
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        crate::com::combine(&self.blocks[0], &w[..self.blocks[0].len()])
    }

    fn program(&self) -> LinearProgram {
        let a = self.rows.concat();
        LinearProgram::new(self.rows.len(), self.n, a, self.rhs.clone())
    }

    fn feasible_weights(&self, tol: f64) -> Option<Vec<f64>> {
        match self.program().feasible_point(tol) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    /// Basic feasible solutions, projected, de-duplicated and pruned to the
    /// extreme points of the image.
    fn vertices(&self, model: &Arc<ModelSpace>, tol: &Tolerances) -> Result<Vec<State>> {
        let red = reduce_rows(&self.rows, &self.rhs, tol.pivot, tol.pivot.sqrt());
        if !red.is_consistent() {
            return Ok(Vec::new());
        }
        let r = red.rank();
        if binomial(self.n, r) > 2_000_000 {
            return Err(Error::Unsupported("too many bases to enumerate".into()));
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        for subset in Combinations::new(self.n, r) {
            let mut a = vec![0.0; r * r];
            for (i, q) in red.basis.iter().enumerate() {
                for (j, &col) in subset.iter().enumerate() {
                    a[i * r + j] = q[col];
                }
            }
            let Some(ws) = solve(r, &a, &red.basis_rhs) else {
                continue;
            };
            if ws.iter().any(|&x| x < -1e-10) {
                continue;
            }
            let mut w = vec![0.0; self.n];
            for (&col, &x) in subset.iter().zip(&ws) {
                w[col] = x.max(0.0);
            }
            let worst = self
                .rows
                .iter()
                .zip(&self.rhs)
                .fold(0.0f64, |m, (row, b)| m.max((dot(row, &w) - b).abs()));
            if worst > tol.region {
                continue;
            }
            let x = self.project(&w);
            if !points.iter().any(|p| max_diff(p, &x) < tol.region) {
                points.push(x);
            }
        }
        // A projected basic solution can sit inside the image; drop those.
        let mut extreme = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let others: Vec<Vec<f64>> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| q.clone())
                .collect();
            if others.is_empty() || mixing_weights(&others, p, 1e-10).is_none() {
                extreme.push(State::trusted(model.clone(), p.clone()));
            }
        }
        Ok(extreme)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in (i + 1)..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
