use corrcov::linalg::{self, cholesky, eig_oracle, frobenius_norm, spectral_norm, trace, DEFAULT_MAX_ITER, DEFAULT_TOL};
use corrcov::DenseMatrix;
use proptest::prelude::*;

fn symmetric(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_dim).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
            DenseMatrix::new(n, n, v).unwrap().symmetrized().unwrap()
        })
    })
}

/// `M Mᵀ + I` is symmetric positive definite.
fn spd(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_dim).prop_flat_map(|n| {
        prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| {
            let m = DenseMatrix::new(n, n, v).unwrap();
            m.gram().add(&DenseMatrix::identity(n)).unwrap()
        })
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_norm_matches_oracle(a in symmetric(40)) {
        let s = spectral_norm(&a, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let eigs = eig_oracle(&a).unwrap();
        let expected = eigs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        prop_assert!((s - expected).abs() <= 1e-8 * s.max(1.0), "{} vs {}", s, expected);
    }

    #[test]
    fn frobenius_and_trace_match_eigenvalues(a in symmetric(30)) {
        let eigs = eig_oracle(&a).unwrap();
        let f2: f64 = eigs.iter().map(|v| v * v).sum();
        prop_assert!(rel_close(frobenius_norm(&a).powi(2), f2, 1e-10));
        let t: f64 = eigs.iter().sum();
        let scale = eigs.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!((trace(&a).unwrap() - t).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn norm_ordering(a in symmetric(30)) {
        let s = spectral_norm(&a, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let f = frobenius_norm(&a);
        let n = a.rows() as f64;
        prop_assert!(s <= f * (1.0 + 1e-12));
        prop_assert!(f <= n.sqrt() * s * (1.0 + 1e-12));
    }

    #[test]
    fn cholesky_reconstructs(a in spd(24)) {
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        let scale = a.as_slice().iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        prop_assert!(back.max_abs_diff(&a).unwrap() <= 1e-12 * scale);
    }
}

#[test]
fn oracle_refuses_large_matrices() {
    let a = DenseMatrix::identity(linalg::ORACLE_MAX_DIM + 1);
    assert!(matches!(eig_oracle(&a), Err(corrcov::Error::OracleSizeExceeded { .. })));
}

#[test]
fn spectral_norm_on_repeated_extreme_eigenvalues() {
    // ±λ with equal magnitude and a cluster just below.
    let d: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 4.0 } else { -4.0 + 1e-9 * i as f64 }).collect();
    let s = spectral_norm(&DenseMatrix::diag(&d), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!((s - 4.0).abs() <= 1e-8 * 4.0, "{s}");
}
