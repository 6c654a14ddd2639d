use als_core::io::{read_matrix_as, write_matrix};
use als_core::{
    als_run, approximation_error, build_test_matrix, c64, factorization_to_svd, gaussian_matrix, AlsConfig, AlsStart,
    DenseMatrix, ErrorNorm, Scalar, TestMatrixSpec, Transform,
};
use proptest::prelude::*;

fn orthonormality_defect<T: Scalar>(q: &DenseMatrix<T>) -> f64 {
    let g = q.adjoint_matmul(q).unwrap();
    g.sub(&DenseMatrix::identity(q.cols())).unwrap().max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn svd_of_a_product_reconstructs_it(m in 3usize..12, n in 3usize..12, k in 1usize..4, seed in any::<u64>()) {
        let k = k.min(m).min(n);
        let s: DenseMatrix<c64> = gaussian_matrix(m, k, seed);
        let t: DenseMatrix<c64> = gaussian_matrix(k, n, seed ^ 0x5a5a);
        let st = s.matmul(&t).unwrap();
        let svd = factorization_to_svd(&s, &t);
        prop_assert_eq!(svd.len(), k);
        prop_assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(orthonormality_defect(&svd.u) < 1e-12);
        prop_assert!(orthonormality_defect(&svd.v) < 1e-12);
        prop_assert!(svd.reconstruct().sub(&st).unwrap().frobenius_norm() <= 1e-12 * st.frobenius_norm());
    }

    #[test]
    fn exact_rank_inputs_are_recovered(m in 4usize..16, n in 4usize..16, k in 1usize..4, seed in any::<u64>()) {
        let b: DenseMatrix<f64> = gaussian_matrix(m, k, seed);
        let c: DenseMatrix<f64> = gaussian_matrix(k, n, seed.wrapping_add(1));
        let a = b.matmul(&c).unwrap();
        let f = als_run(&a, &AlsConfig::new(k, 1, seed)).unwrap();
        let e = approximation_error(&a, &f, ErrorNorm::SpectralExact).unwrap();
        prop_assert!(e <= 1e-10 * a.frobenius_norm(), "residual {}", e);
    }
}

#[test]
fn test_matrix_roundtrips_through_the_binary_format() {
    let a = build_test_matrix(&TestMatrixSpec::new(16, 24, 2, 1e-3, Transform::Dft)).unwrap();
    let mut buf = Vec::new();
    a.write_to(&mut buf).unwrap();
    let back: DenseMatrix<c64> = read_matrix_as(buf.as_slice()).unwrap();
    let mut again = Vec::new();
    write_matrix(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn more_rounds_do_not_lose_accuracy_on_a_test_matrix() {
    let spec = TestMatrixSpec::new(64, 128, 4, 1e-3, Transform::RealOrthogonal).with_seed(5);
    let a = match build_test_matrix(&spec).unwrap() {
        als_core::AnyMatrix::Real(a) => a,
        als_core::AnyMatrix::Complex(_) => unreachable!(),
    };
    let err = |j| {
        let cfg = AlsConfig::new(4, j, 2).with_start(AlsStart::Range);
        approximation_error(&a, &als_run(&a, &cfg).unwrap(), ErrorNorm::SpectralExact).unwrap()
    };
    let (e1, e4) = (err(1), err(4));
    assert!(e1 >= 1e-3 - 1e-12 && e4 >= 1e-3 - 1e-12);
    assert!(e4 <= e1 * (1.0 + 1e-9), "{e1} {e4}");
    assert!(e4 < 1.01e-3, "{e4}");
}
