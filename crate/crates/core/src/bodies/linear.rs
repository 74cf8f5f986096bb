use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An invertible linear map φ of R^n with cached inverse and |det φ|.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    abs_det: f64,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::input("linear map must be a nonempty square matrix"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("linear map has non-finite entries"));
        }
        let n = matrix.nrows();
        let scale = matrix.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let det = matrix.determinant();
        if scale == 0.0 || det.abs() <= 1e-13 * scale.powi(n as i32) {
            return Err(Error::input(format!("linear map is singular (det = {det:e})")));
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("linear map is singular"))?;
        Ok(LinearMap { matrix, inverse, abs_det: det.abs() })
    }

    pub fn from_rows(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::input(format!("expected {} entries for a {n}x{n} map", n * n)));
        }
        Self::new(DMatrix::from_row_slice(n, n, rows))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is invertible")
    }

    pub fn scaling(n: usize, factor: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * factor)
    }

    /// Rotation by `angle` in the (i, j) coordinate plane of R^n.
    pub fn plane_rotation(n: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        if i >= n || j >= n || i == j {
            return Err(Error::input("rotation plane indices out of range"));
        }
        let mut m = DMatrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn abs_det(&self) -> f64 {
        self.abs_det
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    pub fn apply_inverse(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.inverse * x
    }

    /// φ^{-T} x
    pub fn apply_inverse_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inverse.tr_mul(x)
    }

    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        LinearMap::new(&self.matrix * &other.matrix).expect("product of invertible maps")
    }

    /// Applies φ^{-1} to each column of an n×m matrix direction stored
    /// column-major.
    pub fn inverse_columnwise(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(u.len() % n, 0, "matrix direction does not have n rows");
        u.chunks_exact(n)
            .flat_map(|col| (&self.inverse * DVector::from_column_slice(col)).data.as_vec().clone())
            .collect()
    }
}
