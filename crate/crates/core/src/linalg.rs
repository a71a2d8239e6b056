//! Matrix conventions: `M[k, l]` is identified with `R^{kl}` column-major.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{bail, Result};

/// Default cap on `n * m`, the dimension sampled by the Monte-Carlo kernels.
pub const DEFAULT_MAX_NM: usize = 8;

pub const DET_TOL: f64 = 1e-12;

/// Ambient column dimension `n` and number of difference slots `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
}

impl Dims {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_MAX_NM)
    }

    pub fn with_cap(n: usize, m: usize, max_nm: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            bail!(
                InvalidArgument,
                "dimensions must be positive (n={n}, m={m})"
            );
        }
        if n * m > max_nm {
            bail!(
                InvalidArgument,
                "n*m = {} exceeds the configured maximum {max_nm}",
                n * m
            );
        }
        Ok(Self { n, m })
    }

    /// Dimension of `M[n, m]`.
    #[inline]
    pub fn nm(&self) -> usize {
        self.n * self.m
    }
}

/// Dense real matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out.data[i * n + i] = 1.0;
        }
        out
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut out = Self::identity(n);
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Builds from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            bail!(
                InvalidArgument,
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            );
        }
        if data.iter().any(|v| !v.is_finite()) {
            bail!(InvalidArgument, "matrix entries must be finite");
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from a list of rows (the way matrices are usually written down).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            bail!(InvalidArgument, "ragged rows");
        }
        let mut data = vec![0.0; r * c];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                data[j * r + i] = *v;
            }
        }
        Self::from_col_major(r, c, data)
    }

    /// A single column vector.
    pub fn column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// The flattened point of `R^{rows*cols}`.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.data[i * self.cols + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(v, &mut out);
        out
    }

    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, vj) in v.iter().enumerate() {
            let col = self.col(j);
            for (o, c) in out.iter_mut().zip(col) {
                *o += c * vj;
            }
        }
    }

    /// `A^t v` without materializing the transpose.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            bail!(
                InvalidArgument,
                "shape mismatch {}x{} * {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            );
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let c = self.mul_vec(other.col(j));
            out.data[j * self.rows..(j + 1) * self.rows].copy_from_slice(&c);
        }
        Ok(out)
    }

    fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub fn det(&self) -> Result<f64> {
        if self.rows != self.cols {
            bail!(
                InvalidArgument,
                "determinant of a non-square {}x{} matrix",
                self.rows,
                self.cols
            );
        }
        Ok(self.to_na().lu().determinant())
    }

    pub fn inverse(&self) -> Result<Mat> {
        let det = self.det()?;
        if !(det.abs() > DET_TOL) {
            bail!(
                InvalidArgument,
                "matrix is singular (|det| = {:e})",
                det.abs()
            );
        }
        match self.to_na().lu().try_inverse() {
            Some(inv) => Ok(Mat {
                rows: self.rows,
                cols: self.cols,
                data: inv.as_slice().to_vec(),
            }),
            None => bail!(InvalidArgument, "matrix is singular"),
        }
    }
}

/// `theta^t . x` for a column `theta` of length `n` and `x` in `M[n, m]`, giving a row of length `m`.
pub fn pair(theta: &[f64], x: &Mat) -> Result<Vec<f64>> {
    if theta.len() != x.rows() {
        bail!(
            InvalidArgument,
            "pairing a length-{} vector with a {}x{} matrix",
            theta.len(),
            x.rows(),
            x.cols()
        );
    }
    Ok(pair_flat(theta, x.as_slice()))
}

/// [`pair`] on a flattened `x`; `theta.len()` gives `n`.
#[inline]
pub fn pair_flat(theta: &[f64], x: &[f64]) -> Vec<f64> {
    x.chunks_exact(theta.len())
        .map(|col| dot(theta, col))
        .collect()
}

#[inline]
pub(crate) fn pair_into(theta: &[f64], x: &[f64], out: &mut [f64]) {
    for (o, col) in out.iter_mut().zip(x.chunks_exact(theta.len())) {
        *o = dot(theta, col);
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(a.iter().map(|v| v / n).collect())
    } else {
        None
    }
}

#[inline]
pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Solves a small dense system by LU; `None` when singular.
pub(crate) fn solve(rows: usize, a_col_major: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let a = DMatrix::from_column_slice(rows, rows, a_col_major);
    let lu = a.lu();
    if lu.determinant().abs() < 1e-14 {
        return None;
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    lu.solve(&b).map(|x| x.as_slice().to_vec())
}

/// Rank of a set of vectors, used to reject lower-dimensional bodies.
pub(crate) fn rank(vectors: &[Vec<f64>], dim: usize, tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut data = Vec::with_capacity(vectors.len() * dim);
    for v in vectors {
        data.extend_from_slice(v);
    }
    DMatrix::from_column_slice(dim, vectors.len(), &data).rank(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_examples() {
        let x = Mat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(pair(&[1.0, 0.0], &x).unwrap(), vec![1.0, 2.0]);
        assert_eq!(pair(&[0.0, 0.0], &x).unwrap(), vec![0.0, 0.0]);
        // columns (a, c) and (b, d): theta = (1, 1) sums each column
        assert_eq!(pair(&[1.0, 1.0], &x).unwrap(), vec![4.0, 6.0]);
        assert!(pair(&[1.0], &x).is_err());
    }

    #[test]
    fn column_major_flattening() {
        let x = Mat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(x.col(1), &[2.0, 4.0]);
        assert_eq!(x.transpose().col(0), &[1.0, 2.0]);
    }

    #[test]
    fn inverse_and_det() {
        let a = Mat::from_rows(&[&[2.0, 1.0], &[0.0, 3.0]]).unwrap();
        assert!((a.det().unwrap() - 6.0).abs() < 1e-12);
        let inv = a.inverse().unwrap();
        let id = a.mul(&inv).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((id.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let singular = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn dims_cap() {
        assert!(Dims::new(2, 4).is_ok());
        assert!(Dims::new(3, 3).is_err());
        assert!(Dims::new(0, 1).is_err());
    }
}
