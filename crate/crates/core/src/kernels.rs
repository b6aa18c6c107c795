//! Small dense linear algebra.
//!
//! Every statistic in this crate works with moment matrices of dimension
//! `p` or `p + 1` where `p` is the number of regressors, so everything here
//! is a straightforward row-major implementation tuned for tiny matrices.
//! Solves go through an LU factorisation with partial pivoting and are
//! guarded by an infinity-norm condition estimate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Condition estimate beyond which a matrix is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },
    #[error("block {block} is numerically singular (condition estimate {condition:e})")]
    SingularBlock { block: &'static str, condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix entries must be finite")]
    NonFinite,
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn column(values: &[f64]) -> Self {
        Self { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col_vec(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Copy of the sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        let mut b = Mat::zeros(rows, cols);
        for r in 0..rows {
            b.row_mut(r).copy_from_slice(&self.row(r0 + r)[c0..c0 + cols]);
        }
        b
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matmul(&self, rhs: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Mat) -> Result<Mat, LinalgError> {
        if self.rows != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "hcat of {} and {} rows",
                self.rows, rhs.rows
            )));
        }
        let cols = self.cols + rhs.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(rhs.row(r));
        }
        Ok(Mat { rows: self.rows, cols, data })
    }

    /// Vertical concatenation.
    pub fn vcat(&self, rhs: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vcat of {} and {} columns",
                self.cols, rhs.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Mat { rows: self.rows + rhs.rows, cols: self.cols, data })
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

fn zip_with(a: &Mat, b: &Mat, op: impl Fn(f64, f64) -> f64) -> Mat {
    assert!(a.rows == b.rows && a.cols == b.cols, "shape mismatch");
    Mat {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| op(*x, *y)).collect(),
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        zip_with(self, rhs, |x, y| x - y)
    }
}

/// Panics on shape mismatch; use [`Mat::matmul`] for the fallible form.
impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.matmul(rhs).expect("shape mismatch in matrix product")
    }
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    singular: bool,
}

impl Lu {
    pub fn factor(a: &Mat) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch(format!(
                "LU of non-square {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == 0.0 {
                singular = true;
                continue;
            }
            if pivot_row != k {
                for c in 0..n {
                    lu.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, singular })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b` column by column. Caller checks singularity.
    pub fn solve(&self, b: &Mat) -> Mat {
        let n = self.n;
        let mut x = Mat::zeros(n, b.cols);
        for c in 0..b.cols {
            let mut y: Vec<f64> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for i in 0..n {
                let mut s = y[i];
                for j in 0..i {
                    s -= self.lu[i * n + j] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in i + 1..n {
                    s -= self.lu[i * n + j] * y[j];
                }
                y[i] = s / self.lu[i * n + i];
            }
            for i in 0..n {
                x[(i, c)] = y[i];
            }
        }
        x
    }

    pub fn inverse(&self) -> Mat {
        self.solve(&Mat::identity(self.n))
    }
}

/// Infinity-norm condition number `‖A‖∞ ‖A⁻¹‖∞`.
///
/// Computed exactly from the LU inverse, which is affordable at the sizes
/// used here. Exactly singular input gives `+∞`.
pub fn condition_estimate(a: &Mat) -> f64 {
    assert!(a.is_square(), "condition estimate of non-square matrix");
    if a.rows == 0 {
        return 1.0;
    }
    let lu = match Lu::factor(a) {
        Ok(lu) => lu,
        Err(_) => return f64::INFINITY,
    };
    condition_from_lu(a, &lu)
}

fn condition_from_lu(a: &Mat, lu: &Lu) -> f64 {
    if lu.is_singular() {
        return f64::INFINITY;
    }
    let cond = a.norm_inf() * lu.inverse().norm_inf();
    if cond.is_finite() {
        cond
    } else {
        f64::INFINITY
    }
}

/// Factorises `a` and rejects it when its condition estimate exceeds
/// [`SINGULARITY_THRESHOLD`].
pub fn checked_lu(a: &Mat) -> Result<Lu, LinalgError> {
    let lu = Lu::factor(a)?;
    let condition = condition_from_lu(a, &lu);
    if condition > SINGULARITY_THRESHOLD {
        return Err(LinalgError::SingularMatrix { condition });
    }
    Ok(lu)
}

/// Solves `a x = b`.
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat, LinalgError> {
    if !a.is_square() || a.rows != b.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "solve with {}x{} system and {}x{} right-hand side",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(checked_lu(a)?.solve(b))
}

pub fn inverse(a: &Mat) -> Result<Mat, LinalgError> {
    Ok(checked_lu(a)?.inverse())
}

/// Assembles `[[a11, a12], [a21, a22]]`.
pub fn assemble_blocks(a11: &Mat, a12: &Mat, a21: &Mat, a22: &Mat) -> Result<Mat, LinalgError> {
    a11.hcat(a12)?.vcat(&a21.hcat(a22)?)
}

/// Inverse of the block matrix `[[A11, A12], [A21, A22]]` through the Schur
/// complement `S = A22 - A21 A11⁻¹ A12`:
///
/// ```text
/// [ A11⁻¹ + A11⁻¹ A12 S⁻¹ A21 A11⁻¹   -A11⁻¹ A12 S⁻¹ ]
/// [ -S⁻¹ A21 A11⁻¹                     S⁻¹           ]
/// ```
///
/// Only `A11` and `S` need to be invertible.
pub fn partitioned_inverse(a11: &Mat, a12: &Mat, a21: &Mat, a22: &Mat) -> Result<Mat, LinalgError> {
    let (n1, n2) = (a11.rows, a22.rows);
    if !a11.is_square()
        || !a22.is_square()
        || a12.rows != n1
        || a12.cols != n2
        || a21.rows != n2
        || a21.cols != n1
    {
        return Err(LinalgError::DimensionMismatch(format!(
            "blocks {}x{}, {}x{}, {}x{}, {}x{} do not form a partitioned square matrix",
            a11.rows, a11.cols, a12.rows, a12.cols, a21.rows, a21.cols, a22.rows, a22.cols
        )));
    }
    let lu11 = checked_lu(a11).map_err(|e| as_block_error(e, "A11"))?;
    let a11_inv_a12 = lu11.solve(a12);
    let schur = a22 - &(a21 * &a11_inv_a12);
    let lu_s = checked_lu(&schur).map_err(|e| as_block_error(e, "S"))?;

    let s_inv = lu_s.inverse();
    // A21 A11⁻¹ = (A11⁻ᵀ A21ᵀ)ᵀ
    let a21_a11_inv = checked_lu(&a11.transpose())
        .map_err(|e| as_block_error(e, "A11"))?
        .solve(&a21.transpose())
        .transpose();

    let top_right = (&a11_inv_a12 * &s_inv).scale(-1.0);
    let bottom_left = (&s_inv * &a21_a11_inv).scale(-1.0);
    let top_left = &lu11.inverse() - &(&top_right * &a21_a11_inv);

    assemble_blocks(&top_left, &top_right, &bottom_left, &s_inv)
}

fn as_block_error(e: LinalgError, block: &'static str) -> LinalgError {
    match e {
        LinalgError::SingularMatrix { condition } => LinalgError::SingularBlock { block, condition },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        let scale = b.max_abs().max(1.0);
        (a - b).max_abs() <= tol * scale
    }

    #[test]
    fn identity_blocks_invert_to_identity() {
        let inv = partitioned_inverse(
            &Mat::identity(2),
            &Mat::zeros(2, 3),
            &Mat::zeros(3, 2),
            &Mat::identity(3),
        )
        .unwrap();
        assert!(close(&inv, &Mat::identity(5), 1e-15));
    }

    #[test]
    fn diagonal_scalar_blocks() {
        let s = |v: f64| Mat::from_rows(&[vec![v]]);
        let inv = partitioned_inverse(&s(2.0), &s(0.0), &s(0.0), &s(4.0)).unwrap();
        assert!(close(&inv, &Mat::diag(&[0.5, 0.25]), 1e-15));
    }

    #[test]
    fn scalar_blocks_match_closed_form_two_by_two() {
        // [[a, b], [c, d]]⁻¹ = [[d, -b], [-c, a]] / (ad - bc), here det = -2.
        let s = |v: f64| Mat::from_rows(&[vec![v]]);
        let inv = partitioned_inverse(&s(1.0), &s(2.0), &s(3.0), &s(4.0)).unwrap();
        let expected = Mat::from_rows(&[vec![-2.0, 1.0], vec![1.5, -0.5]]);
        assert!(close(&inv, &expected, 1e-12));
    }

    #[test]
    fn singular_blocks_are_reported() {
        let s = |v: f64| Mat::from_rows(&[vec![v]]);
        let err = partitioned_inverse(&s(0.0), &s(1.0), &s(1.0), &s(1.0)).unwrap_err();
        assert!(matches!(err, LinalgError::SingularBlock { block: "A11", .. }));
        // S = 4 - 2*2/1 = 0
        let err = partitioned_inverse(&s(1.0), &s(2.0), &s(2.0), &s(4.0)).unwrap_err();
        assert!(matches!(err, LinalgError::SingularBlock { block: "S", .. }));
    }

    #[test]
    fn mismatched_blocks_are_rejected() {
        let err = partitioned_inverse(
            &Mat::identity(2),
            &Mat::zeros(2, 2),
            &Mat::zeros(3, 2),
            &Mat::identity(3),
        )
        .unwrap_err();
        assert!(matches!(err, LinalgError::DimensionMismatch(_)));
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = Mat::from_rows(&[vec![1.5, -2.0], vec![0.25, 7.0], vec![3.0, 1e-3]]);
        assert_eq!(solve(&Mat::identity(3), &b).unwrap(), b);
        let x = solve(&Mat::diag(&[2.0, 4.0]), &Mat::column(&[2.0, 4.0])).unwrap();
        assert_eq!(x, Mat::column(&[1.0, 1.0]));
    }

    #[test]
    fn solve_rejects_singular_systems() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let err = solve(&a, &Mat::column(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, LinalgError::SingularMatrix { .. }));
        let near = Mat::diag(&[1.0, 1e-14]);
        assert!(solve(&near, &Mat::column(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn condition_estimates() {
        assert_eq!(condition_estimate(&Mat::identity(3)), 1.0);
        assert!(condition_estimate(&Mat::diag(&[1.0, 1e-14])) >= 1e13);
        assert_eq!(condition_estimate(&Mat::diag(&[2.0, 8.0])), 4.0);
        assert_eq!(condition_estimate(&Mat::zeros(2, 2)), f64::INFINITY);
    }

    #[test]
    fn constructor_validates_shape_and_finiteness() {
        assert!(Mat::new(2, 2, vec![1.0; 3]).is_err());
        assert_eq!(Mat::new(1, 2, vec![1.0, f64::NAN]), Err(LinalgError::NonFinite));
    }
}
