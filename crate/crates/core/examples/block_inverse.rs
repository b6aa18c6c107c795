//! Inverts a 4x4 matrix through its 2x2 blocks and checks the product.

use breakscan::kernels::{assemble_blocks, condition_estimate, partitioned_inverse, Mat};

fn main() {
    let a11 = Mat::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
    let a12 = Mat::from_rows(&[vec![0.5, 0.0], vec![0.2, 0.1]]);
    let a21 = a12.transpose();
    let a22 = Mat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]);

    let inv = partitioned_inverse(&a11, &a12, &a21, &a22).expect("invertible");
    let a = assemble_blocks(&a11, &a12, &a21, &a22).unwrap();
    let residual = (&a.matmul(&inv).unwrap() - &Mat::identity(4)).max_abs();

    println!("condition estimate: {:.3}", condition_estimate(&a));
    println!("inverse:\n{inv:?}");
    println!("max |A A^-1 - I| = {residual:.2e}");
}
