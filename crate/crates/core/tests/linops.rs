mod common;

use pffw::linops::{dot, extreme_eigpair, frob_inner, norm2, SymMat, Which};
use pffw::verify::oracles::jacobi_eigenvalues;
use proptest::prelude::*;

#[test]
fn lanczos_matches_jacobi_on_random_matrices() {
    let mut rng = common::rng(1);
    for n in [1, 2, 3, 7, 20, 45] {
        for _ in 0..5 {
            let a = common::random_sym(&mut rng, n);
            let ev = jacobi_eigenvalues(&a, n);
            let m = SymMat::from_row_major(n, &a).unwrap();
            let lo = extreme_eigpair(&m, Which::Smallest, 1e-10, 40 * n + 40, 3).unwrap();
            let hi = extreme_eigpair(&m, Which::Largest, 1e-10, 40 * n + 40, 3).unwrap();
            assert!(common::close(lo.value, ev[0], 1e-7), "n={n}: {} vs {}", lo.value, ev[0]);
            assert!(common::close(hi.value, ev[n - 1], 1e-7), "n={n}: {} vs {}", hi.value, ev[n - 1]);
            assert!((norm2(&lo.vector) - 1.0).abs() < 1e-10);
            assert!(common::close(m.quad_form(&lo.vector), lo.value, 1e-8));
        }
    }
}

#[test]
fn clustered_spectrum() {
    // diag(1, 1, 1, 1 + 1e-6, 5): the smallest value is shared three ways
    let m = SymMat::from_diag(&[1.0, 1.0, 1.0, 1.0 + 1e-6, 5.0]);
    let p = extreme_eigpair(&m, Which::Smallest, 1e-12, 200, 0).unwrap();
    assert!((p.value - 1.0).abs() < 1e-9);
}

#[test]
fn frobenius_inner_product() {
    let a = SymMat::from_row_major(2, &[1.0, 2.0, 2.0, 3.0]).unwrap();
    let b = SymMat::identity(2);
    assert_eq!(frob_inner(&a, &b).unwrap(), 4.0);
    assert!(frob_inner(&a, &SymMat::identity(3)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_bounds(seed in 0u64..10_000, n in 1usize..12) {
        let mut rng = common::rng(seed);
        let a = common::random_sym(&mut rng, n);
        let m = SymMat::from_row_major(n, &a).unwrap();
        let lo = extreme_eigpair(&m, Which::Smallest, 1e-10, 40 * n + 40, seed).unwrap();
        let hi = extreme_eigpair(&m, Which::Largest, 1e-10, 40 * n + 40, seed).unwrap();
        let v: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 5) as f64 - 2.0).collect();
        let vv = dot(&v, &v);
        if vv > 0.0 {
            let r = m.quad_form(&v) / vv;
            prop_assert!(r >= lo.value - 1e-8 && r <= hi.value + 1e-8);
        }
        prop_assert!(lo.value <= hi.value + 1e-12);
    }

    #[test]
    fn matvec_is_symmetric(seed in 0u64..10_000, n in 1usize..10) {
        let mut rng = common::rng(seed);
        let a = common::random_sym(&mut rng, n);
        let m = SymMat::from_row_major(n, &a).unwrap();
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 + 1.0).collect();
        prop_assert!((dot(&m.matvec(&x), &y) - dot(&x, &m.matvec(&y))).abs() < 1e-9);
    }
}
