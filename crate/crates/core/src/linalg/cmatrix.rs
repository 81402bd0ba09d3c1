use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::linalg::lu::Lu;
use crate::linalg::{svd, LinalgError, Matrix};
use crate::scalar::Scalar;

/// Dense complex matrix, row-major. Used for frequency-domain evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_real(m: &Matrix<T>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m
                .as_slice()
                .iter()
                .map(|&x| Complex::new(x, T::zero()))
                .collect(),
        }
    }

    /// `re + i·im` for equally shaped real parts.
    pub fn from_parts(re: &Matrix<T>, im: &Matrix<T>) -> Self {
        assert_eq!(re.shape(), im.shape());
        Self {
            rows: re.rows(),
            cols: re.cols(),
            data: re
                .as_slice()
                .iter()
                .zip(im.as_slice())
                .map(|(&a, &b)| Complex::new(a, b))
                .collect(),
        }
    }

    /// `s·I − A` for square real `A`.
    pub fn shifted(s: Complex<T>, a: &Matrix<T>) -> Self {
        let mut m = Self::from_real(&-a);
        for i in 0..a.rows() {
            m[(i, i)] += s;
        }
        m
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn real_part(&self) -> Matrix<T> {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|z| z.re).collect())
    }

    pub fn imag_part(&self) -> Matrix<T> {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|z| z.im).collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if rhs.rows != self.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "complex solve",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let lu = Lu::factor::<T>(self.rows, self.data.clone())?;
        Ok(Self {
            rows: rhs.rows,
            cols: rhs.cols,
            data: lu.solve::<T>(&rhs.data, rhs.cols),
        })
    }

    /// Determinant by partial-pivoting LU; zero when a pivot vanishes
    /// numerically.
    pub fn determinant(&self) -> Result<Complex<T>, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        match Lu::factor::<T>(self.rows, self.data.clone()) {
            Ok(lu) => Ok(lu.determinant::<T>()),
            Err(LinalgError::Singular) => Ok(Complex::new(T::zero(), T::zero())),
            Err(e) => Err(e),
        }
    }

    /// Solves `X · self = lhs`, i.e. `X = lhs · self⁻¹`.
    pub fn solve_right(&self, lhs: &Self) -> Result<Self, LinalgError> {
        Ok(self.transpose().solve(&lhs.transpose())?.transpose())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Real embedding `[[Re, −Im], [Im, Re]]`; every singular value of the
    /// complex matrix appears twice among those of the embedding.
    pub fn real_embedding(&self) -> Matrix<T> {
        let re = self.real_part();
        let im = self.imag_part();
        Matrix::block(&[&[Some(&re), Some(&-&im)], &[Some(&im), Some(&re)]])
    }

    /// Singular values, descending, each listed once.
    pub fn singular_values(&self) -> Vec<T> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let sv = svd::singular_values(&self.real_embedding());
        sv.into_iter().step_by(2).collect()
    }

    /// Largest singular value (spectral norm).
    pub fn spectral_norm(&self) -> T {
        self.singular_values().first().copied().unwrap_or_else(T::zero)
    }

    /// Smallest of the `min(rows, cols)` singular values.
    pub fn min_singular_value(&self) -> T {
        self.singular_values().last().copied().unwrap_or_else(T::zero)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "complex product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "complex sum shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "complex difference shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}
