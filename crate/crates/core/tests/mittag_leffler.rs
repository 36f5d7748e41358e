use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use proptest::prelude::*;

use fracpk::pkpd::reference_matrix;
use fracpk::{mittag_leffler_matrix, mittag_leffler_scalar, SquareMatrix, TruncationPolicy};

fn to_na(m: &SquareMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.as_slice())
}

fn max_rel_diff(ours: &SquareMatrix, oracle: &DMatrix<f64>) -> f64 {
    let n = ours.dim();
    let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((ours[(i, j)] - oracle[(i, j)]).abs() / scale);
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matrix_exp_matches_nalgebra(entries in prop::array::uniform16(-1.0f64..1.0), norm in 0.05f64..2.0) {
        let raw = SquareMatrix::from_row_major(entries.to_vec()).unwrap();
        let m = raw.scaled(norm / raw.norm_inf());
        let ours = mittag_leffler_matrix(1.0, 1.0, &m, &TruncationPolicy::default()).unwrap();
        let oracle = Matrix4::from_row_slice(m.as_slice()).exp();
        let oracle = DMatrix::from_row_slice(4, 4, oracle.as_slice()).transpose();
        prop_assert!(max_rel_diff(&ours, &oracle) <= 1e-9);
    }

    #[test]
    fn scalar_series_matches_exp(z in -5.0f64..5.0) {
        let e = mittag_leffler_scalar(1.0, 1.0, z, &TruncationPolicy::default()).unwrap();
        prop_assert!((e - z.exp()).abs() <= 1e-12 * z.exp());
    }

    #[test]
    fn diagonal_matrices_reduce_to_scalars(d in prop::array::uniform3(-3.0f64..1.0), alpha in 0.5f64..1.0) {
        let m = SquareMatrix::diagonal(&d);
        let p = TruncationPolicy::default();
        let e = mittag_leffler_matrix(alpha, 1.0, &m, &p).unwrap();
        for (i, &x) in d.iter().enumerate() {
            let s = mittag_leffler_scalar(alpha, 1.0, x, &p).unwrap();
            prop_assert!((e[(i, i)] - s).abs() <= 1e-13 * s.abs().max(1.0));
        }
    }
}

#[test]
fn nalgebra_layout_sanity() {
    // Row-major input must survive the round trip used above.
    let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let e = mittag_leffler_matrix(1.0, 1.0, &m, &TruncationPolicy::default()).unwrap();
    assert_eq!(e[(0, 1)], 1.0);
    assert_eq!(e[(1, 0)], 0.0);
    assert_eq!(to_na(&m)[(0, 1)], 1.0);
}

/// E_α(M) through a similarity transform. The compartment matrix is not
/// symmetric, but D^{-1/2} A D^{1/2} with the right diagonal D is, because the
/// transfer structure is a star around the central compartment.
#[test]
fn compartment_matrix_by_eigendecomposition() {
    let alpha = 0.9;
    let a = reference_matrix();
    let m = a.scaled(1.8397f64.powf(alpha));
    let ours = mittag_leffler_matrix(alpha, 1.0, &m, &TruncationPolicy::default()).unwrap();

    // Row 4 couples one way only, so the symmetrisable block is rows 1–3.
    let mut d = [1.0f64; 3];
    for k in 1..3 {
        d[k] = m[(0, k)] / m[(k, 0)];
    }
    let mut sym = DMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            sym[(i, j)] = m[(i, j)] * (d[i] / d[j]).sqrt();
        }
    }
    let eig = SymmetricEigen::new(sym);
    let f = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| mittag_leffler_scalar(alpha, 1.0, l, &TruncationPolicy::default()).unwrap()),
    );
    let block = &eig.eigenvectors * f * eig.eigenvectors.transpose();
    for i in 0..3 {
        for j in 0..3 {
            let oracle = block[(i, j)] * (d[j] / d[i]).sqrt();
            assert!(
                (ours[(i, j)] - oracle).abs() <= 1e-10 * oracle.abs().max(1e-3),
                "({i},{j}): {} vs {oracle}",
                ours[(i, j)]
            );
        }
    }
}

/// Full 4×4 check with a general eigendecomposition (real distinct spectrum).
#[test]
fn compartment_matrix_full_spectrum() {
    let alpha = 0.9;
    let m = reference_matrix().scaled(1.8397f64.powf(alpha));
    let ours = mittag_leffler_matrix(alpha, 1.0, &m, &TruncationPolicy::default()).unwrap();
    let na = to_na(&m);
    let eigen = na.clone().complex_eigenvalues();
    assert!(eigen.iter().all(|l| l.im.abs() < 1e-12));
    let lambdas: Vec<f64> = eigen.iter().map(|l| l.re).collect();

    // Eigenvectors from the null space of M − λI.
    let mut v = DMatrix::zeros(4, 4);
    for (k, &l) in lambdas.iter().enumerate() {
        let shifted = &na - DMatrix::identity(4, 4) * l;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.unwrap();
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        v.set_column(k, &vt.row(idx).transpose());
    }
    let f = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        4,
        lambdas
            .iter()
            .map(|&l| mittag_leffler_scalar(alpha, 1.0, l, &TruncationPolicy::default()).unwrap()),
    ));
    let oracle = &v * f * v.clone().try_inverse().unwrap();
    assert!(
        max_rel_diff(&ours, &oracle) <= 1e-10,
        "{}",
        max_rel_diff(&ours, &oracle)
    );
}
