use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gmaxent_core::com::random::random_hermitian;
use gmaxent_core::hermitian::{eig, HermitianMatrix};
use gmaxent_core::lattice::{random_feasible_region, region_from_mean};
use gmaxent_core::maxent::{oracle_maxent, solve_dual, solve_polytope};
use gmaxent_core::{MaxEntProblem, ModelSpace, Objective, Observable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_problem(model: std::sync::Arc<ModelSpace>, count: usize, objective: Objective) -> MaxEntProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    MaxEntProblem::new(random_feasible_region(&model, count, &mut rng).0, objective).unwrap()
}

fn eigensolver(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [2, 4, 8] {
        let m = random_hermitian(d, 1.0, &mut rng);
        c.bench_function(&format!("eig d={d}"), |b| b.iter(|| eig(black_box(&m)).unwrap()));
    }
}

fn dual(c: &mut Criterion) {
    let model = ModelSpace::quantum(2).unwrap();
    let h = Observable::spectral(model, &HermitianMatrix::diagonal(&[0.0, 1.0])).unwrap();
    let gibbs = MaxEntProblem::new(region_from_mean(&h, 0.3).unwrap(), Objective::VonNeumann).unwrap();
    c.bench_function("dual gibbs qubit", |b| {
        b.iter(|| solve_dual(black_box(&gibbs)).unwrap())
    });

    let ququart = random_problem(ModelSpace::quantum(4).unwrap(), 3, Objective::VonNeumann);
    c.bench_function("dual quantum d=4, 3 constraints", |b| {
        b.iter(|| solve_dual(black_box(&ququart)).unwrap())
    });

    let classical = random_problem(ModelSpace::classical(16).unwrap(), 5, Objective::Shannon);
    c.bench_function("dual classical d=16, 5 constraints", |b| {
        b.iter(|| solve_dual(black_box(&classical)).unwrap())
    });
}

fn frank_wolfe(c: &mut Criterion) {
    let problem = random_problem(ModelSpace::classical(6).unwrap(), 2, Objective::Shannon);
    c.bench_function("frank-wolfe classical d=6", |b| {
        b.iter(|| solve_polytope(black_box(&problem)).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let problem = random_problem(ModelSpace::quantum(2).unwrap(), 1, Objective::VonNeumann);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("qubit at 1e-2", |b| {
        b.iter(|| oracle_maxent(black_box(&problem), 1e-2).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolver, dual, frank_wolfe, oracle);
criterion_main!(benches);
