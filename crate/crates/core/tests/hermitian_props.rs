use gmaxent_core::com::random::random_hermitian;
use gmaxent_core::hermitian::{eig, frechet_exp_directional, matrix_exp, HermitianMatrix};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(seed: u64, dim: usize, scale: f64) -> HermitianMatrix {
    random_hermitian(dim, scale, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Eigenvalues of a real symmetric matrix by textbook cyclic Jacobi.
fn real_symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `[[A, −B], [B, A]]` for `H = A + iB`; its spectrum is that of `H`, doubled.
fn real_embedding(h: &HermitianMatrix) -> Vec<f64> {
    let d = h.dim();
    let n = 2 * d;
    let mut out = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = h.get(i, j);
            out[i * n + j] = z.re;
            out[(i + d) * n + (j + d)] = z.re;
            out[i * n + (j + d)] = -z.im;
            out[(i + d) * n + j] = z.im;
        }
    }
    out
}

fn max_entry_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eig_reconstructs_and_matches_real_embedding(seed in any::<u64>(), dim in 2usize..=8) {
        let m = matrix(seed, dim, 1.0);
        let e = eig(&m).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&m) <= 1e-10);
        prop_assert!(e.unitarity_error() <= 1e-10);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));

        let doubled = real_symmetric_eigenvalues(real_embedding(&m), 2 * dim);
        for (k, pair) in doubled.chunks(2).enumerate() {
            prop_assert!((pair[0] - pair[1]).abs() <= 1e-9);
            prop_assert!((pair[0] - e.eigenvalues[k]).abs() <= 1e-9);
        }
    }

    #[test]
    fn exp_commutes_and_bounds_trace(seed in any::<u64>(), dim in 2usize..=6) {
        let m = matrix(seed, dim, 1.0);
        let x = matrix_exp(&m).unwrap();
        let xm = x.matmul(&m);
        let mx = m.matmul(&x);
        prop_assert!(max_entry_diff(&xm, &mx) <= 1e-9);
        let d = dim as f64;
        prop_assert!(x.trace() >= d * (m.trace() / d).exp() - 1e-9);
    }

    #[test]
    fn frechet_is_linear(seed in any::<u64>(), dim in 2usize..=5, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let m = matrix(seed, dim, 1.0);
        let h1 = matrix(seed.wrapping_add(1), dim, 1.0);
        let h2 = matrix(seed.wrapping_add(2), dim, 1.0);
        let combined = &h1.scale(a) + &h2.scale(b);
        let lhs = frechet_exp_directional(&m, &combined).unwrap();
        let rhs = &frechet_exp_directional(&m, &h1).unwrap().scale(a)
            + &frechet_exp_directional(&m, &h2).unwrap().scale(b);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn frechet_matches_finite_difference(seed in any::<u64>(), dim in 2usize..=5) {
        let m = matrix(seed, dim, 1.0);
        let h = matrix(seed.wrapping_add(7), dim, 1.0);
        let eps = 1e-5;
        let up = matrix_exp(&(&m + &h.scale(eps))).unwrap();
        let dn = matrix_exp(&(&m - &h.scale(eps))).unwrap();
        let fd = (&up - &dn).scale(0.5 / eps);
        let exact = frechet_exp_directional(&m, &h).unwrap();
        prop_assert!(exact.max_abs_diff(&fd) <= 1e-6 * exact.max_abs().max(1.0));
    }

    #[test]
    fn trace_derivative_identity(seed in any::<u64>(), dim in 2usize..=5) {
        let m = matrix(seed, dim, 1.0);
        let h = matrix(seed.wrapping_add(3), dim, 1.0);
        let eps = 1e-5;
        let up = matrix_exp(&(&m + &h.scale(eps))).unwrap().trace();
        let dn = matrix_exp(&(&m - &h.scale(eps))).unwrap().trace();
        let fd = (up - dn) / (2.0 * eps);
        let exact = matrix_exp(&m).unwrap().trace_product(&h);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }
}

#[test]
fn degenerate_spectra_reconstruct() {
    let mut m = HermitianMatrix::identity(4).scale(2.0);
    m = &m + &HermitianMatrix::diagonal(&[0.0, 0.0, 1e-13, 1e-13]);
    let e = eig(&m).unwrap();
    assert!(e.reconstruct().max_abs_diff(&m) <= 1e-12);
}
