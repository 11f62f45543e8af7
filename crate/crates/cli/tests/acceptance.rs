//! End-to-end acceptance checks, run without the test harness so that each
//! criterion's PASS/FAIL line is always printed. Exits non-zero on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gmaxent_cli::report::SolutionReport;
use gmaxent_cli::schema::{Entry, Tensor};
use gmaxent_core::com::random::{random_density_matrix, random_projection_family, random_state};
use gmaxent_core::com::{check_state_axioms, Effect};
use gmaxent_core::hermitian::{matrix_exp, HermitianMatrix};
use gmaxent_core::lattice::{
    includes, join, meet, random_feasible_region, region_from_effect, region_from_mean, ConvexRegion,
};
use gmaxent_core::maxent::{oracle_maxent, partition_function, solve, solve_dual, OracleOutcome};
use gmaxent_core::{MaxEntProblem, ModelSpace, Objective, Observable, SolveStatus, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Check = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn gibbs() -> Verdict {
    let model = ModelSpace::quantum(2).unwrap();
    let h = Observable::spectral(model.clone(), &HermitianMatrix::diagonal(&[0.0, 1.0])).unwrap();
    let problem = MaxEntProblem::new(region_from_mean(&h, 0.3).unwrap(), Objective::VonNeumann).unwrap();
    let start = Instant::now();
    let sol = solve(&problem).map_err(|e| e.to_string())?;
    let took = within(Duration::from_millis(50), start, "solve")?;

    let rho = sol.state.density_matrix().unwrap();
    let expected = HermitianMatrix::diagonal(&[0.7, 0.3]);
    let lambda1 = sol.multipliers[0];
    let lambda0 = sol.lambda0.ok_or("no lambda0")?;
    let ln_z = partition_function(&model, problem.region.constraints(), &sol.multipliers)
        .unwrap()
        .1;
    ensure(sol.status == SolveStatus::Converged, || {
        format!("status {:?}", sol.status)
    })?;
    ensure(rho.max_abs_diff(&expected) <= 1e-8, || {
        format!("rho off by {:e}", rho.max_abs_diff(&expected))
    })?;
    ensure((lambda1 - (7.0f64 / 3.0).ln()).abs() <= 1e-8, || {
        format!("lambda1 = {lambda1}")
    })?;
    ensure((lambda0 - ln_z).abs() <= 1e-8, || {
        format!("lambda0 {lambda0} vs lnZ {ln_z}")
    })?;
    ensure((sol.entropy - 0.610_864).abs() <= 1e-6, || {
        format!("entropy {}", sol.entropy)
    })?;
    let closed_form = -(0.7f64 * 0.7f64.ln() + 0.3 * 0.3f64.ln());
    ensure((sol.entropy - closed_form).abs() <= 1e-8, || {
        format!("entropy {}", sol.entropy)
    })?;
    Ok(format!("lambda1 = {lambda1:.9}, S = {:.9}, {took:?}", sol.entropy))
}

fn random_quantum_problems() -> Vec<MaxEntProblem> {
    (0..50)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let d = rng.random_range(2..=4);
            let count = rng.random_range(1..=3);
            let model = ModelSpace::quantum(d).unwrap();
            let (region, _) = random_feasible_region(&model, count, &mut rng);
            MaxEntProblem::new(region, Objective::VonNeumann).unwrap()
        })
        .collect()
}

fn stationarity() -> Verdict {
    let start = Instant::now();
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for problem in random_quantum_problems() {
        let sol = solve_dual(&problem).map_err(|e| e.to_string())?;
        ensure(sol.status == SolveStatus::Converged, || {
            format!("status {:?}", sol.status)
        })?;
        let cs = problem.region.constraints();
        for i in 0..cs.len() {
            let mut up = sol.multipliers.clone();
            let mut dn = sol.multipliers.clone();
            up[i] += eps;
            dn[i] -= eps;
            let fd = (partition_function(problem.model(), cs, &up).unwrap().1
                - partition_function(problem.model(), cs, &dn).unwrap().1)
                / (2.0 * eps);
            worst = worst.max((fd + cs[i].target()).abs());
        }
    }
    ensure(worst <= 1e-5, || format!("worst |dlnZ/dl + r| = {worst:e}"))?;
    let took = within(Duration::from_secs(30), start, "50 problems")?;
    Ok(format!("worst deviation {worst:.2e}, {took:?}"))
}

fn exponential_form() -> Verdict {
    let mut worst = 0.0f64;
    for problem in random_quantum_problems() {
        let sol = solve_dual(&problem).map_err(|e| e.to_string())?;
        let model = problem.model();
        let d = model.hilbert_dim().unwrap();
        let mut exponent = HermitianMatrix::identity(d).scale(-sol.lambda0.ok_or("no lambda0")?);
        for (c, &l) in problem.region.constraints().iter().zip(&sol.multipliers) {
            exponent = &exponent - &model.operator_of_coords(c.functional()).unwrap().scale(l);
        }
        let rho = sol.state.density_matrix().unwrap();
        worst = worst.max(rho.max_abs_diff(&matrix_exp(&exponent).unwrap()));
    }
    ensure(worst <= 1e-8, || format!("worst distance {worst:e}"))?;
    Ok(format!("worst distance {worst:.2e}"))
}

fn oracle_equivalence() -> Verdict {
    let resolution = 1e-3;
    let start = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_residual = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let problem = if seed < 50 {
            let d = rng.random_range(2..=4);
            let model = ModelSpace::classical(d).unwrap();
            let count = rng.random_range(1..d);
            MaxEntProblem::new(random_feasible_region(&model, count, &mut rng).0, Objective::Shannon).unwrap()
        } else {
            let model = ModelSpace::quantum(2).unwrap();
            let count = rng.random_range(1..=2);
            MaxEntProblem::new(random_feasible_region(&model, count, &mut rng).0, Objective::VonNeumann).unwrap()
        };
        let sol = solve(&problem).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(sol.max_residual());
        match oracle_maxent(&problem, resolution).map_err(|e| e.to_string())? {
            OracleOutcome::Found { entropy, .. } => worst_gap = worst_gap.max(entropy - sol.entropy),
            OracleOutcome::Infeasible => return Err(format!("seed {seed}: oracle found nothing")),
        }
    }
    ensure(worst_gap <= 2.0 * resolution, || {
        format!("oracle beats solver by {worst_gap:e}")
    })?;
    ensure(worst_residual <= 1e-8, || format!("residual {worst_residual:e}"))?;
    let took = within(Duration::from_secs(120), start, "100 problems")?;
    Ok(format!(
        "max(oracle - solver) = {worst_gap:.2e}, max residual {worst_residual:.2e}, {took:?}"
    ))
}

fn povm_condition() -> Verdict {
    let model = ModelSpace::quantum(2).unwrap();
    let e_op = HermitianMatrix::diagonal(&[0.3, 0.7]);
    let effect = Effect::from_operator(model.clone(), &e_op).unwrap();
    let by_effect = region_from_effect(&effect, 0.65).unwrap();
    // The same condition phrased as a mean of the two-outcome observable {E, I - E}.
    let obs = Observable::from_functionals(
        model.clone(),
        vec![
            ("E".into(), effect.functional().to_vec(), Some(1.0)),
            ("not E".into(), effect.complement().functional().to_vec(), Some(0.0)),
        ],
    )
    .unwrap();
    let by_mean = region_from_mean(&obs, 0.65).unwrap();
    ensure(
        by_effect.constraints()[0].functional() == by_mean.constraints()[0].functional(),
        || "effect and mean conditions produce different functionals".into(),
    )?;

    let a = solve(&MaxEntProblem::new(by_effect, Objective::VonNeumann).unwrap()).map_err(|e| e.to_string())?;
    let b = solve(&MaxEntProblem::new(by_mean, Objective::VonNeumann).unwrap()).map_err(|e| e.to_string())?;
    ensure(a.state == b.state && a.entropy == b.entropy, || "paths disagree".into())?;
    let rho = a.state.density_matrix().unwrap();
    let expected = HermitianMatrix::diagonal(&[0.125, 0.875]);
    ensure(rho.max_abs_diff(&expected) <= 1e-8, || {
        format!("rho off by {:e}", rho.max_abs_diff(&expected))
    })?;
    let closed_form = -(0.125f64 * 0.125f64.ln() + 0.875 * 0.875f64.ln());
    ensure((a.entropy - closed_form).abs() <= 1e-8, || {
        format!("entropy {}", a.entropy)
    })?;
    ensure((a.entropy - 0.376_770).abs() <= 1e-6, || {
        format!("entropy {}", a.entropy)
    })?;
    Ok(format!("S = {:.9}, identical to the mean-value path", a.entropy))
}

fn random_region<R: Rng>(model: &Arc<ModelSpace>, rng: &mut R) -> ConvexRegion {
    if rng.random_bool(0.5) {
        let count = rng.random_range(0..=2);
        random_feasible_region(model, count, rng).0
    } else {
        let n = rng.random_range(1..=3);
        let gens = (0..n).map(|_| random_state(model, rng)).collect();
        ConvexRegion::from_generators(model.clone(), gens).unwrap()
    }
}

fn lattice_laws() -> Verdict {
    let start = Instant::now();
    let same = |a: &ConvexRegion, b: &ConvexRegion| includes(a, b).unwrap() && includes(b, a).unwrap();
    let models = [ModelSpace::classical(3).unwrap(), ModelSpace::square_bit()];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for model in &models {
        for pair in 0..200 {
            let a = random_region(model, &mut rng);
            let b = random_region(model, &mut rng);
            let fail = |law: &str| format!("{law} fails on {:?} pair {pair}", model.kind());
            let ab = meet(&a, &b).unwrap();
            let a_or_b = join(&a, &b).unwrap();
            ensure(same(&ab, &meet(&b, &a).unwrap()), || fail("meet commutativity"))?;
            ensure(same(&a_or_b, &join(&b, &a).unwrap()), || fail("join commutativity"))?;
            ensure(same(&meet(&a, &a).unwrap(), &a), || fail("meet idempotence"))?;
            ensure(same(&join(&a, &a).unwrap(), &a), || fail("join idempotence"))?;
            ensure(same(&meet(&a, &a_or_b).unwrap(), &a), || fail("absorption a ∧ (a ∨ b)"))?;
            ensure(same(&join(&a, &ab).unwrap(), &a), || fail("absorption a ∨ (a ∧ b)"))?;
            ensure(includes(&a, &ab).unwrap(), || fail("meet inclusion"))?;
        }
    }
    let took = within(Duration::from_secs(30), start, "400 pairs")?;
    Ok(format!("400 pairs, {took:?}"))
}

fn run_cli(file: &str) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gmaxent"))
        .arg("solve")
        .arg(example(file))
        .env("GMAXENT_LOG", "quiet")
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn infeasible_and_boundary() -> Verdict {
    let (code, _) = run_cli("contradictory.json");
    ensure(code == 3, || {
        format!("contradictory conditions exit {code}, expected 3")
    })?;
    let (code, text) = run_cli("boundary.json");
    ensure(code == 4, || format!("boundary target exit {code}, expected 4"))?;
    let report: SolutionReport = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let Tensor::Matrix(rows) = report.state else {
        return Err("state is not a matrix".into());
    };
    let target = [[1.0, 0.0], [0.0, 0.0]];
    let mut dist = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let (re, im): (f64, f64) = Entry::parts(*e);
            dist = dist.max((re - target[i][j]).abs()).max(im.abs());
        }
    }
    ensure(dist <= 1e-3, || format!("limiting state is {dist:e} from diag(1, 0)"))?;
    Ok(format!("exit 3 and exit 4, limiting state within {dist:.1e}"))
}

fn state_axioms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let d = rng.random_range(2..=4);
        let model = ModelSpace::quantum(d).unwrap();
        let rho = random_density_matrix(d, &mut rng);
        let s = State::from_density_matrix(model, &rho).map_err(|e| e.to_string())?;
        let family = random_projection_family(d, &mut rng);
        let report = check_state_axioms(&s, &family).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_residual());
    }
    ensure(worst <= 1e-9, || format!("worst residual {worst:e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn monotonicity() -> Verdict {
    let mut worst_rise = f64::NEG_INFINITY;
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let (model, objective) = if seed % 2 == 0 {
            (ModelSpace::quantum(3).unwrap(), Objective::VonNeumann)
        } else {
            (ModelSpace::classical(5).unwrap(), Objective::Shannon)
        };
        let (full, _) = random_feasible_region(&model, 3, &mut rng);
        let mut region = ConvexRegion::whole(model.clone());
        let mut previous = f64::INFINITY;
        for step in 0..=full.constraints().len() {
            if step > 0 {
                let c = full.constraints()[step - 1].clone();
                region = meet(
                    &region,
                    &ConvexRegion::from_constraints(model.clone(), vec![c]).unwrap(),
                )
                .unwrap();
            }
            let sol =
                solve(&MaxEntProblem::new(region.clone(), objective.clone()).unwrap()).map_err(|e| e.to_string())?;
            ensure(sol.status == SolveStatus::Converged, || {
                format!("chain {seed}: {:?}", sol.status)
            })?;
            if previous.is_finite() {
                worst_rise = worst_rise.max(sol.entropy - previous);
            }
            previous = sol.entropy;
        }
    }
    ensure(worst_rise <= 1e-8, || format!("entropy rose by {worst_rise:e}"))?;
    Ok(format!("largest step change {worst_rise:.2e}"))
}

fn main() {
    let criteria: [Check; 9] = [
        ("1 Gibbs state reproduction", gibbs),
        ("2 dual stationarity", stationarity),
        ("3 exponential-family form", exponential_form),
        ("4 oracle equivalence", oracle_equivalence),
        ("5 effect conditions share the mean-value path", povm_condition),
        ("6 lattice laws", lattice_laws),
        ("7 infeasible and boundary exit codes", infeasible_and_boundary),
        ("8 state axioms", state_axioms),
        ("9 entropy monotone along meets", monotonicity),
    ];
    let mut failures = Vec::new();
    for (name, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                println!("[FAIL] {name}: {detail}");
                failures.push(name);
            }
        }
    }
    if !failures.is_empty() {
        eprintln!("failed: {failures:?}");
        std::process::exit(1);
    }
}
