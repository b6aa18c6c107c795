use breakscan::kernels::{assemble_blocks, inverse, partitioned_inverse, solve, LinalgError, Mat};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_dmatrix(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Diagonally dominant so that both the matrix and its leading block are well conditioned.
fn dominant(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |mut v| {
        for i in 0..n {
            v[i * n + i] += n as f64 + 1.0;
        }
        Mat::new(n, n, v).unwrap()
    })
}

fn split(a: &Mat, n1: usize) -> (Mat, Mat, Mat, Mat) {
    let n = a.rows();
    (a.block(0, 0, n1, n1), a.block(0, n1, n1, n - n1), a.block(n1, 0, n - n1, n1), a.block(n1, n1, n - n1, n - n1))
}

fn max_rel_gap(a: &Mat, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(1.0);
    a.as_slice()
        .iter()
        .zip(b.transpose().as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

fn system() -> impl Strategy<Value = (Mat, usize)> {
    (2usize..=8).prop_flat_map(|n| (dominant(n), 1..n))
}

proptest! {
    #[test]
    fn partitioned_inverse_matches_direct((a, n1) in system()) {
        let (a11, a12, a21, a22) = split(&a, n1);
        let block = partitioned_inverse(&a11, &a12, &a21, &a22).unwrap();
        let direct = to_dmatrix(&a).try_inverse().unwrap();
        prop_assert!(max_rel_gap(&block, &direct) < 1e-10);
    }

    #[test]
    fn inverse_times_matrix_is_identity(a in (1usize..=8).prop_flat_map(dominant)) {
        let inv = inverse(&a).unwrap();
        let prod = a.matmul(&inv).unwrap();
        let gap = (&prod - &Mat::identity(a.rows())).max_abs();
        prop_assert!(gap < 1e-12);
    }

    #[test]
    fn solve_agrees_with_nalgebra(a in (1usize..=6).prop_flat_map(dominant), b in prop::collection::vec(-5.0..5.0f64, 6)) {
        let n = a.rows();
        let rhs = Mat::column(&b[..n]);
        let x = solve(&a, &rhs).unwrap();
        let oracle = to_dmatrix(&a).lu().solve(&to_dmatrix(&rhs)).unwrap();
        prop_assert!(max_rel_gap(&x, &oracle) < 1e-12);
    }

    #[test]
    fn assembled_blocks_round_trip((a, n1) in system()) {
        let (a11, a12, a21, a22) = split(&a, n1);
        prop_assert_eq!(assemble_blocks(&a11, &a12, &a21, &a22).unwrap(), a);
    }
}

#[test]
fn singular_leading_block_is_reported() {
    let a = Mat::from_rows(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 2.0], vec![1.0, 2.0, 3.0]]);
    let (a11, a12, a21, a22) = split(&a, 2);
    assert!(matches!(
        partitioned_inverse(&a11, &a12, &a21, &a22),
        Err(LinalgError::SingularBlock { block: "A11", .. })
    ));
}

#[test]
fn singular_schur_complement_is_reported() {
    // A11 = I, S = A22 - A21 A12 = 1 - 1 = 0.
    let a = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
    let (a11, a12, a21, a22) = split(&a, 1);
    assert!(matches!(
        partitioned_inverse(&a11, &a12, &a21, &a22),
        Err(LinalgError::SingularBlock { block: "S", .. })
    ));
}
