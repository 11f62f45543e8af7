use std::sync::Arc;

use gmaxent_core::com::random::{
    random_density_matrix, random_effect, random_povm, random_projection_family, random_state,
};
use gmaxent_core::com::{check_state_axioms, evaluate, spectral_mixture, validate_povm, Effect, Outcome};
use gmaxent_core::hermitian::{eig, HermitianMatrix};
use gmaxent_core::{ModelSpace, Observable, State};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<Arc<ModelSpace>> {
    let pentagon: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    vec![
        ModelSpace::classical(2).unwrap(),
        ModelSpace::classical(5).unwrap(),
        ModelSpace::quantum(2).unwrap(),
        ModelSpace::quantum(3).unwrap(),
        ModelSpace::quantum(4).unwrap(),
        ModelSpace::square_bit(),
        ModelSpace::polytope_affine(&pentagon).unwrap(),
    ]
}

#[test]
fn generated_states_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in models() {
        for _ in 0..500 {
            let s = random_state(&model, &mut rng);
            let revalidated = State::new(model.clone(), s.coords().to_vec());
            assert!(revalidated.is_ok(), "{:?}: {:?}", model.kind(), revalidated);
        }
    }
}

#[test]
fn effects_evaluate_into_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for model in models() {
        for _ in 0..200 {
            let e = random_effect(&model, &mut rng);
            let s = random_state(&model, &mut rng);
            let p = evaluate(&e, &s).unwrap();
            assert!((0.0..=1.0).contains(&p));
            let q = evaluate(&e.complement(), &s).unwrap();
            assert!((p + q - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn projector_and_complement_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let d = rng.random_range(2..=5);
        let model = ModelSpace::quantum(d).unwrap();
        let family = random_projection_family(d, &mut rng);
        let Some(p) = family.first() else { continue };
        let rho = State::from_density_matrix(model.clone(), &random_density_matrix(d, &mut rng)).unwrap();
        let e = Effect::from_operator(model.clone(), p).unwrap();
        let complement = Effect::from_operator(model.clone(), &(&HermitianMatrix::identity(d) - p)).unwrap();
        let total = evaluate(&e, &rho).unwrap() + evaluate(&complement, &rho).unwrap();
        assert!((total - 1.0).abs() <= 1e-10);
    }
}

fn scale_one(obs: &Observable, index: usize) -> Observable {
    let outcomes: Vec<Outcome> = obs
        .outcomes()
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let mut o = o.clone();
            if k == index {
                let f: Vec<f64> = o.effect.functional().iter().map(|x| 1.1 * x).collect();
                o.effect = Effect::unchecked(obs.model().clone(), f).unwrap();
            }
            o
        })
        .collect();
    Observable::unchecked(obs.model().clone(), outcomes)
}

#[test]
fn generated_povms_validate_and_mutations_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for model in models() {
        for _ in 0..50 {
            let k = rng.random_range(2..=4);
            let obs = random_povm(&model, k, &mut rng);
            let report = validate_povm(&obs);
            assert!(report.is_valid(), "{:?}: {report}", model.kind());
            let victim = rng.random_range(0..k);
            assert!(!validate_povm(&scale_one(&obs, victim)).is_valid());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spectral_mixture_weights_are_the_spectrum(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = ModelSpace::quantum(d).unwrap();
        let rho = random_density_matrix(d, &mut rng);
        let s = State::from_density_matrix(model, &rho).unwrap();
        let mut weights: Vec<f64> = spectral_mixture(&s).unwrap().into_iter().map(|(w, _)| w).collect();
        weights.sort_by(f64::total_cmp);
        let spectrum: Vec<f64> = eig(&rho).unwrap().eigenvalues.into_iter().filter(|&k| k > 1e-12).collect();
        prop_assert_eq!(weights.len(), spectrum.len());
        for (w, k) in weights.iter().zip(&spectrum) {
            prop_assert!((w - k).abs() <= 1e-9);
        }
    }

    #[test]
    fn state_axioms_hold(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = ModelSpace::quantum(d).unwrap();
        let s = random_state(&model, &mut rng);
        let family = random_projection_family(d, &mut rng);
        let report = check_state_axioms(&s, &family).unwrap();
        prop_assert!(report.passed(), "{:?}", report);
    }
}
